use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{AccuracySummary, GroupAccuracies, ROW_NAMES};
use super::perceptual::PerceptualReport;
use super::MemberRecord;
use crate::classifiers::Scheme;
use crate::config::{ClassWeighting, Config, GridMode, TieSide};
use crate::dataset::ClassLabel;
use crate::features::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordPrediction {
    pub id: String,
    pub truth: ClassLabel,
    pub predicted: ClassLabel,
    pub fold: usize,
    pub decision_values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub test_size: usize,
    pub members: Vec<MemberRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub seed: u64,
    pub accuracies: GroupAccuracies,
    pub folds: Vec<FoldSummary>,
    /// Pooled over folds, in dataset order.
    pub predictions: Vec<RecordPrediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeReport {
    pub scheme: Scheme,
    pub title: String,
    pub summary: AccuracySummary,
    pub repetitions: Vec<RepetitionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortInfo {
    pub recordings: usize,
    pub neurotypical: usize,
    pub dysarthria: usize,
    pub aos: usize,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub tool_version: String,
    pub config: Config,
    /// Choices not fixed by the method description, stated in words.
    pub conventions: Vec<String>,
    pub cohort: CohortInfo,
    pub schemes: Vec<SchemeReport>,
    pub perceptual: Option<PerceptualReport>,
}

impl EvaluationReport {
    pub fn new(m: &FeatureMatrix, cfg: &Config, schemes: Vec<SchemeReport>) -> Self {
        let [n, d, a] = m.class_counts();
        Self {
            tool_version: crate::VERSION.to_string(),
            config: cfg.clone(),
            conventions: conventions(cfg),
            cohort: CohortInfo {
                recordings: m.len(),
                neurotypical: n,
                dysarthria: d,
                aos: a,
                features: m.names.clone(),
            },
            schemes,
            perceptual: None,
        }
    }

    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeReport> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }

    /// The scheme shown against the judges: the hierarchical one if present.
    pub fn primary(&self) -> Option<&SchemeReport> {
        self.scheme(Scheme::Hierarchical).or(self.schemes.first())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn conventions(cfg: &Config) -> Vec<String> {
    vec![
        match cfg.svm.class_weighting {
            ClassWeighting::InverseFrequency => "SVM class weights n / (2 n_c) from each training split".to_string(),
            ClassWeighting::None => "SVM classes unweighted".to_string(),
        },
        if cfg.svm.standardize {
            "features z-scored with training-split mean and std".to_string()
        } else {
            "features used unscaled".to_string()
        },
        match cfg.evaluation.grid_mode {
            GridMode::LogRange => format!(
                "C and gamma grids are log-spaced ranges ({} and {} points)",
                cfg.evaluation.c_points, cfg.evaluation.gamma_points
            ),
            GridMode::Endpoints => "C and gamma grids are the two stated endpoints".to_string(),
        },
        "hierarchical stages and baseline members tuned independently on their own binary subtask".to_string(),
        match cfg.evaluation.stage1_tie {
            TieSide::Patient => "stage-1 decision value 0 counts as patient".to_string(),
            TieSide::Neurotypical => "stage-1 decision value 0 counts as neurotypical".to_string(),
        },
        "accuracies computed per repetition over pooled fold predictions; std is the population std".to_string(),
        format!(
            "long-term spectrum averaged over frames above {} dB; octave bands centred at {} Hz x 2^k",
            cfg.dsp.ltas_active_db, cfg.dsp.ltas_base_hz
        ),
        "inner folds lacking a class, and non-converging grid fits, score 0 (logged)".to_string(),
    ]
}

/// Markdown tables: scheme comparison, automatic vs perceptual group
/// accuracies, feature selection counts, and the effective configuration.
pub fn render_markdown(r: &EvaluationReport) -> String {
    let mut s = String::new();
    let plan = &r.config.evaluation;
    let _ = writeln!(s, "# Evaluation report\n");
    let _ = writeln!(s, "Tool version {}.\n", r.tool_version);
    let _ = writeln!(
        s,
        "{} recordings (neurotypical {}, dysarthria {}, AoS {}), {} features. {} repetitions of stratified {}-fold cross-validation with {}-fold inner tuning, seed {}.\n",
        r.cohort.recordings,
        r.cohort.neurotypical,
        r.cohort.dysarthria,
        r.cohort.aos,
        r.cohort.features.len(),
        plan.repetitions,
        plan.outer_folds,
        plan.inner_folds,
        plan.seed
    );

    let _ = writeln!(s, "## Balanced accuracy per configuration\n");
    let _ = writeln!(s, "| Configuration | Balanced accuracy [%] |");
    let _ = writeln!(s, "|---|---|");
    for sch in &r.schemes {
        let _ = writeln!(s, "| {} | {} |", sch.title, sch.summary.balanced.percent());
    }
    s.push('\n');

    if let Some(primary) = r.primary() {
        let _ = writeln!(s, "## Accuracy per group ({})\n", primary.title);
        let _ = writeln!(s, "| Accuracy [%] | Automatic | Perceptual |");
        let _ = writeln!(s, "|---|---|---|");
        let auto = primary.summary.rows();
        let perc = r.perceptual.as_ref().map(|p| p.summary.rows());
        for (k, name) in ROW_NAMES.iter().enumerate() {
            let p = perc.map_or_else(|| "n/a".to_string(), |rows| rows[k].percent());
            let _ = writeln!(s, "| {name} | {} | {p} |", auto[k].percent());
        }
        s.push('\n');
        if let Some(p) = &r.perceptual {
            let _ = writeln!(
                s,
                "Perceptual values aggregate {} judges.\n",
                p.judges.len()
            );
        }
    }

    for sch in &r.schemes {
        let table = selection_counts(sch);
        if table.is_empty() {
            continue;
        }
        let tasks: Vec<&String> = table
            .values()
            .next()
            .map(|m| m.keys().collect())
            .unwrap_or_default();
        let folds: usize = sch.repetitions.iter().map(|r| r.folds.len()).sum();
        let _ = writeln!(
            s,
            "## Selected features, {} (out of {} folds)\n",
            sch.title, folds
        );
        let _ = write!(s, "| Feature |");
        for t in &tasks {
            let _ = write!(s, " {t} |");
        }
        let _ = write!(s, "\n|---|");
        for _ in &tasks {
            let _ = write!(s, "---|");
        }
        s.push('\n');
        for name in &r.cohort.features {
            if let Some(counts) = table.get(name) {
                let _ = write!(s, "| {name} |");
                for t in &tasks {
                    let _ = write!(s, " {} |", counts.get(*t).copied().unwrap_or(0));
                }
                s.push('\n');
            }
        }
        s.push('\n');
    }

    let _ = writeln!(s, "## Conventions\n");
    for c in &r.conventions {
        let _ = writeln!(s, "- {c}");
    }
    let _ = writeln!(s, "\n## Effective configuration\n");
    let _ = writeln!(
        s,
        "```json\n{}\n```",
        serde_json::to_string_pretty(&r.config).expect("config serializes")
    );
    s
}

/// feature -> task -> number of folds selecting it. Empty for schemes
/// that keep every feature.
fn selection_counts(sch: &SchemeReport) -> BTreeMap<String, BTreeMap<String, usize>> {
    let mut out: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    if !sch.scheme.selects_features() {
        return out;
    }
    let tasks: Vec<String> = sch.scheme.tasks().iter().map(|t| t.name()).collect();
    for rep in &sch.repetitions {
        for fold in &rep.folds {
            for m in &fold.members {
                for f in &m.features {
                    let row = out
                        .entry(f.clone())
                        .or_insert_with(|| tasks.iter().map(|t| (t.clone(), 0)).collect());
                    *row.entry(m.task.clone()).or_insert(0) += 1;
                }
            }
        }
    }
    out
}
