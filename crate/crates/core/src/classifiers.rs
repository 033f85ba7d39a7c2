//! Three-class schemes built from binary SVMs: the two-stage hierarchy
//! (neurotypical vs patient, then dysarthria vs AoS) and the one-vs-one and
//! one-vs-rest baselines.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{SvmConfig, TieSide};
use crate::dataset::ClassLabel;
use crate::error::{ArtifactError, EvalError, Result};
use crate::svm::{artifact, train_svm, ClassMap, HyperParams, SvmModel};

pub const ARTIFACT_KIND: &str = "composite";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Hierarchical,
    /// The hierarchy with every feature kept in both stages.
    HierarchicalNoFs,
    Ovo,
    Ovr,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Hierarchical,
        Scheme::HierarchicalNoFs,
        Scheme::Ovo,
        Scheme::Ovr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Hierarchical => "hierarchical",
            Scheme::HierarchicalNoFs => "hierarchical-no-fs",
            Scheme::Ovo => "ovo",
            Scheme::Ovr => "ovr",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Scheme::Hierarchical => "Hierarchical with feature selection",
            Scheme::HierarchicalNoFs => "Hierarchical without feature selection",
            Scheme::Ovo => "One-versus-One",
            Scheme::Ovr => "One-versus-Rest",
        }
    }

    /// Binary subtasks, one per member SVM, in member order.
    pub fn tasks(self) -> Vec<Task> {
        use ClassLabel::*;
        match self {
            Scheme::Hierarchical | Scheme::HierarchicalNoFs => vec![Task::Stage1, Task::Stage2],
            Scheme::Ovo => vec![
                Task::Pair(Neurotypical, Dysarthria),
                Task::Pair(Neurotypical, AoS),
                Task::Pair(Dysarthria, AoS),
            ],
            Scheme::Ovr => vec![
                Task::Rest(Neurotypical),
                Task::Rest(Dysarthria),
                Task::Rest(AoS),
            ],
        }
    }

    /// Whether tuning searches over the feature count.
    pub fn selects_features(self) -> bool {
        !matches!(self, Scheme::HierarchicalNoFs)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| {
                format!(
                    "unknown scheme `{s}` (expected hierarchical, hierarchical-no-fs, ovo or ovr)"
                )
            })
    }
}

/// A binary subtask: which recordings take part and which side is +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Patient (+1) vs neurotypical, on all recordings.
    Stage1,
    /// AoS (+1) vs dysarthria, on patient recordings.
    Stage2,
    /// First (+1) vs second.
    Pair(ClassLabel, ClassLabel),
    /// The class (+1) vs the other two.
    Rest(ClassLabel),
}

impl Task {
    pub fn includes(self, label: ClassLabel) -> bool {
        match self {
            Task::Stage1 | Task::Rest(_) => true,
            Task::Stage2 => label.is_patient(),
            Task::Pair(a, b) => label == a || label == b,
        }
    }

    pub fn is_positive(self, label: ClassLabel) -> bool {
        match self {
            Task::Stage1 => label.is_patient(),
            Task::Stage2 => label == ClassLabel::AoS,
            Task::Pair(a, _) => label == a,
            Task::Rest(c) => label == c,
        }
    }

    pub fn class_map(self) -> ClassMap {
        match self {
            Task::Stage1 => ClassMap::new("patient", "neurotypical"),
            Task::Stage2 => ClassMap::new("aos", "dysarthria"),
            Task::Pair(a, b) => ClassMap::new(a.as_str(), b.as_str()),
            Task::Rest(c) => ClassMap::new(c.as_str(), format!("not-{c}")),
        }
    }

    pub fn name(self) -> String {
        match self {
            Task::Stage1 => "stage1".into(),
            Task::Stage2 => "stage2".into(),
            Task::Pair(a, b) => format!("{a}-vs-{b}"),
            Task::Rest(c) => format!("{c}-vs-rest"),
        }
    }

    /// Row indices taking part and their +1 flags.
    pub fn view(self, labels: &[ClassLabel]) -> (Vec<usize>, Vec<bool>) {
        labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| self.includes(l))
            .map(|(i, &l)| (i, self.is_positive(l)))
            .unzip()
    }
}

/// Trains the member SVM of one subtask on the rows it covers.
pub fn train_task<R: AsRef<[f64]> + Sync>(
    task: Task,
    rows: &[R],
    labels: &[ClassLabel],
    hp: &HyperParams,
    names: &[String],
    cfg: &SvmConfig,
) -> Result<SvmModel> {
    let (idx, positive) = task.view(labels);
    let subset: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_ref()).collect();
    Ok(train_svm(
        &subset,
        &positive,
        hp,
        names,
        task.class_map(),
        cfg,
    )?)
}

fn require_all_classes(labels: &[ClassLabel]) -> Result<()> {
    for c in ClassLabel::ALL {
        if !labels.contains(&c) {
            return Err(EvalError::MissingClass(c.to_string()).into());
        }
    }
    Ok(())
}

fn train_members<R: AsRef<[f64]> + Sync>(
    tasks: &[Task],
    rows: &[R],
    labels: &[ClassLabel],
    hps: &[HyperParams],
    names: &[String],
    cfg: &SvmConfig,
) -> Result<Vec<SvmModel>> {
    assert_eq!(tasks.len(), hps.len(), "one hyperparameter set per member");
    require_all_classes(labels)?;
    tasks
        .par_iter()
        .zip(hps)
        .map(|(&t, hp)| train_task(t, rows, labels, hp, names, cfg))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalModel {
    pub stage1: SvmModel,
    pub stage2: SvmModel,
    pub stage1_tie: TieSide,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchicalDecision {
    pub label: ClassLabel,
    pub stage1: f64,
    /// Absent when stage 1 answered neurotypical.
    pub stage2: Option<f64>,
}

pub fn train_hierarchical<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[ClassLabel],
    hp1: &HyperParams,
    hp2: &HyperParams,
    names: &[String],
    cfg: &SvmConfig,
    stage1_tie: TieSide,
) -> Result<HierarchicalModel> {
    let mut m = train_members(
        &[Task::Stage1, Task::Stage2],
        rows,
        labels,
        &[*hp1, *hp2],
        names,
        cfg,
    )?;
    let stage2 = m.pop().expect("two members");
    let stage1 = m.pop().expect("two members");
    Ok(HierarchicalModel {
        stage1,
        stage2,
        stage1_tie,
    })
}

impl HierarchicalModel {
    pub fn decide(&self, x: &[f64]) -> HierarchicalDecision {
        let d1 = self.stage1.decision_value(x);
        decide_hierarchical(d1, || self.stage2.decision_value(x), self.stage1_tie)
    }

    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        self.decide(x).label
    }
}

/// Stage 2 is evaluated only for inputs stage 1 sends to the patient side.
pub fn decide_hierarchical(
    d1: f64,
    stage2: impl FnOnce() -> f64,
    tie: TieSide,
) -> HierarchicalDecision {
    let patient = match tie {
        TieSide::Patient => d1 >= 0.0,
        TieSide::Neurotypical => d1 > 0.0,
    };
    if !patient {
        return HierarchicalDecision {
            label: ClassLabel::Neurotypical,
            stage1: d1,
            stage2: None,
        };
    }
    let d2 = stage2();
    HierarchicalDecision {
        label: if d2 >= 0.0 {
            ClassLabel::AoS
        } else {
            ClassLabel::Dysarthria
        },
        stage1: d1,
        stage2: Some(d2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvoModel {
    /// Pairs (neurotypical, dysarthria), (neurotypical, AoS), (dysarthria, AoS).
    pub members: Vec<SvmModel>,
}

pub fn train_ovo<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[ClassLabel],
    hps: &[HyperParams; 3],
    names: &[String],
    cfg: &SvmConfig,
) -> Result<OvoModel> {
    Ok(OvoModel {
        members: train_members(&Scheme::Ovo.tasks(), rows, labels, hps, names, cfg)?,
    })
}

impl OvoModel {
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.members.iter().map(|m| m.decision_value(x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        let ballots: Vec<(ClassLabel, f64)> = Scheme::Ovo
            .tasks()
            .into_iter()
            .zip(self.decision_values(x))
            .map(|(t, d)| match t {
                Task::Pair(a, b) => (if d >= 0.0 { a } else { b }, d.abs()),
                _ => unreachable!("one-vs-one members are pairs"),
            })
            .collect();
        ovo_vote(&ballots)
    }
}

/// Majority vote over `(winner, |decision value|)` ballots. A tie in votes
/// goes to the largest summed confidence, then to the earlier class.
pub fn ovo_vote(ballots: &[(ClassLabel, f64)]) -> ClassLabel {
    let mut votes = [0usize; 3];
    let mut support = [0.0f64; 3];
    for &(c, conf) in ballots {
        votes[c.index()] += 1;
        support[c.index()] += conf;
    }
    let mut best = ClassLabel::Neurotypical;
    for c in ClassLabel::ALL {
        let (i, b) = (c.index(), best.index());
        if votes[i] > votes[b] || (votes[i] == votes[b] && support[i] > support[b]) {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrModel {
    /// One member per class in class order, class side positive.
    pub members: Vec<SvmModel>,
}

pub fn train_ovr<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[ClassLabel],
    hps: &[HyperParams; 3],
    names: &[String],
    cfg: &SvmConfig,
) -> Result<OvrModel> {
    Ok(OvrModel {
        members: train_members(&Scheme::Ovr.tasks(), rows, labels, hps, names, cfg)?,
    })
}

impl OvrModel {
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        self.members.iter().map(|m| m.decision_value(x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> ClassLabel {
        let d = self.decision_values(x);
        ovr_argmax(&[d[0], d[1], d[2]])
    }
}

/// Argmax over signed decision values; ties go to the earlier class.
pub fn ovr_argmax(values: &[f64; 3]) -> ClassLabel {
    let mut best = 0;
    for i in 1..3 {
        if values[i] > values[best] {
            best = i;
        }
    }
    ClassLabel::ALL[best]
}

/// Prediction with the member decision values behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: ClassLabel,
    pub decision_values: Vec<Option<f64>>,
}

/// Any trained scheme, as stored under `models/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeModel {
    pub scheme: Scheme,
    pub tasks: Vec<Task>,
    pub body: SchemeModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeModel {
    Hierarchical(Box<HierarchicalModel>),
    Ovo(OvoModel),
    Ovr(OvrModel),
}

impl CompositeModel {
    /// Trains `scheme` with one hyperparameter set per member task.
    pub fn train<R: AsRef<[f64]> + Sync>(
        scheme: Scheme,
        rows: &[R],
        labels: &[ClassLabel],
        hps: &[HyperParams],
        names: &[String],
        cfg: &SvmConfig,
        stage1_tie: TieSide,
    ) -> Result<Self> {
        let tasks = scheme.tasks();
        let members = train_members(&tasks, rows, labels, hps, names, cfg)?;
        let mut it = members.into_iter();
        let mut next = || it.next().expect("member per task");
        let body = match scheme {
            Scheme::Hierarchical | Scheme::HierarchicalNoFs => {
                SchemeModel::Hierarchical(Box::new(HierarchicalModel {
                    stage1: next(),
                    stage2: next(),
                    stage1_tie,
                }))
            }
            Scheme::Ovo => SchemeModel::Ovo(OvoModel {
                members: vec![next(), next(), next()],
            }),
            Scheme::Ovr => SchemeModel::Ovr(OvrModel {
                members: vec![next(), next(), next()],
            }),
        };
        Ok(Self {
            scheme,
            tasks,
            body,
        })
    }

    pub fn members(&self) -> Vec<&SvmModel> {
        match &self.body {
            SchemeModel::Hierarchical(h) => vec![&h.stage1, &h.stage2],
            SchemeModel::Ovo(m) => m.members.iter().collect(),
            SchemeModel::Ovr(m) => m.members.iter().collect(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Prediction {
        match &self.body {
            SchemeModel::Hierarchical(h) => {
                let d = h.decide(x);
                Prediction {
                    label: d.label,
                    decision_values: vec![Some(d.stage1), d.stage2],
                }
            }
            SchemeModel::Ovo(m) => Prediction {
                label: m.predict(x),
                decision_values: m.decision_values(x).into_iter().map(Some).collect(),
            },
            SchemeModel::Ovr(m) => Prediction {
                label: m.predict(x),
                decision_values: m.decision_values(x).into_iter().map(Some).collect(),
            },
        }
    }

    pub fn to_artifact(&self) -> std::result::Result<String, ArtifactError> {
        artifact::seal(ARTIFACT_KIND, self)
    }

    pub fn from_artifact(text: &str) -> std::result::Result<Self, ArtifactError> {
        artifact::unseal(ARTIFACT_KIND, text)
    }
}
