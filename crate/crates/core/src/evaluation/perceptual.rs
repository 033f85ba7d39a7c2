use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{AccuracySummary, GroupAccuracies};
use crate::dataset::ClassLabel;
use crate::error::EvalError;

/// First decision a judge makes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Screening {
    Neurotypical,
    Patient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeResponse {
    pub judge_id: String,
    pub recording_id: String,
    pub stage1: Screening,
    /// Dysarthria or AoS; present exactly when `stage1` is patient.
    pub stage2: Option<ClassLabel>,
}

impl JudgeResponse {
    pub fn new(
        judge_id: &str,
        recording_id: &str,
        stage1: Screening,
        stage2: Option<ClassLabel>,
    ) -> Result<Self, EvalError> {
        let r = Self {
            judge_id: judge_id.to_string(),
            recording_id: recording_id.to_string(),
            stage1,
            stage2,
        };
        r.check()?;
        Ok(r)
    }

    /// The response a judge would give for a predicted class.
    pub fn from_label(judge_id: &str, recording_id: &str, label: ClassLabel) -> Self {
        Self {
            judge_id: judge_id.to_string(),
            recording_id: recording_id.to_string(),
            stage1: if label.is_patient() {
                Screening::Patient
            } else {
                Screening::Neurotypical
            },
            stage2: label.is_patient().then_some(label),
        }
    }

    fn check(&self) -> Result<(), EvalError> {
        let bad = |message: &str| EvalError::InconsistentResponse {
            judge: self.judge_id.clone(),
            recording: self.recording_id.clone(),
            message: message.to_string(),
        };
        match (self.stage1, self.stage2) {
            (Screening::Neurotypical, None) => Ok(()),
            (Screening::Neurotypical, Some(_)) => {
                Err(bad("a subtype was given for a neurotypical answer"))
            }
            (Screening::Patient, None) => Err(bad("a patient answer needs a subtype")),
            (Screening::Patient, Some(ClassLabel::Neurotypical)) => {
                Err(bad("neurotypical is not a patient subtype"))
            }
            (Screening::Patient, Some(_)) => Ok(()),
        }
    }

    pub fn label(&self) -> ClassLabel {
        match self.stage1 {
            Screening::Neurotypical => ClassLabel::Neurotypical,
            Screening::Patient => self.stage2.expect("checked on construction"),
        }
    }
}

/// Reads `judge_id,recording_id,stage1,stage2` rows; `stage2` may be empty
/// or `none` for neurotypical answers.
pub fn parse_judge_responses<R: Read>(
    input: R,
    origin: &Path,
) -> Result<Vec<JudgeResponse>, EvalError> {
    let parse_err = |line: usize, message: String| EvalError::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column `{name}`")))
    };
    let (cj, cr, c1, c2) = (
        col("judge_id")?,
        col("recording_id")?,
        col("stage1")?,
        col("stage2")?,
    );
    let mut out = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let field = |c: usize| rec.get(c).unwrap_or("").to_string();
        let stage1 = match field(c1).to_ascii_lowercase().as_str() {
            "neurotypical" => Screening::Neurotypical,
            "patient" => Screening::Patient,
            other => {
                return Err(parse_err(
                    line,
                    format!("stage1 must be neurotypical or patient, got `{other}`"),
                ))
            }
        };
        let stage2 = match field(c2).to_ascii_lowercase().as_str() {
            "" | "none" => None,
            "dysarthria" => Some(ClassLabel::Dysarthria),
            "aos" => Some(ClassLabel::AoS),
            other => {
                return Err(parse_err(
                    line,
                    format!("stage2 must be dysarthria, aos or empty, got `{other}`"),
                ))
            }
        };
        out.push(JudgeResponse::new(&field(cj), &field(cr), stage1, stage2)?);
    }
    Ok(out)
}

pub fn load_judge_responses(path: &Path) -> Result<Vec<JudgeResponse>, EvalError> {
    let file = std::fs::File::open(path).map_err(|e| EvalError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    parse_judge_responses(file, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeResult {
    pub judge_id: String,
    pub recordings: usize,
    pub accuracies: GroupAccuracies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptualReport {
    /// Sorted by judge id.
    pub judges: Vec<JudgeResult>,
    pub summary: AccuracySummary,
}

/// Per-judge accuracies through the same code path as automatic results,
/// aggregated across judges.
pub fn perceptual_metrics(
    responses: &[JudgeResponse],
    truths: &HashMap<String, ClassLabel>,
) -> Result<PerceptualReport, EvalError> {
    let mut by_judge: BTreeMap<&str, (Vec<ClassLabel>, Vec<ClassLabel>)> = BTreeMap::new();
    for r in responses {
        r.check()?;
        let truth = *truths
            .get(&r.recording_id)
            .ok_or_else(|| EvalError::UnknownRecording(r.recording_id.clone()))?;
        let entry = by_judge.entry(&r.judge_id).or_default();
        entry.0.push(r.label());
        entry.1.push(truth);
    }
    let judges = by_judge
        .into_iter()
        .map(|(judge, (pred, truth))| {
            Ok(JudgeResult {
                judge_id: judge.to_string(),
                recordings: pred.len(),
                accuracies: GroupAccuracies::from_predictions(&pred, &truth)?,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    let summary = AccuracySummary::of(&judges.iter().map(|j| j.accuracies).collect::<Vec<_>>());
    Ok(PerceptualReport { judges, summary })
}
