//! Repeated stratified cross-validation with nested tuning, the accuracy
//! metrics, judge ingestion, synthetic cohorts and reports.
//!
//! Everything computed inside an outer fold (masks, scalers, chosen
//! hyperparameters, models) sees only that fold's training rows.

mod folds;
mod metrics;
mod perceptual;
mod report;
pub mod synth;
mod tuning;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{CompositeModel, Prediction, Scheme};
use crate::config::{Config, EvaluationConfig};
use crate::dataset::ClassLabel;
use crate::error::{Error, EvalError, Result};
use crate::features::FeatureMatrix;
use crate::selection::SelectionMask;
use crate::svm::{HyperParams, Scaler};

pub use folds::{derive_seed, stratified_folds, stratified_folds_relaxed};
pub use metrics::{
    balanced_accuracy, binary_balanced_accuracy, group_accuracy, patient_accuracy, AccuracySummary,
    GroupAccuracies, GroupCount, GroupCounts, MeanStd, ROW_NAMES,
};
pub use perceptual::{
    load_judge_responses, parse_judge_responses, perceptual_metrics, JudgeResponse, JudgeResult,
    PerceptualReport, Screening,
};
pub use report::{
    render_markdown, EvaluationReport, RecordPrediction, RepetitionResult, SchemeReport,
};
pub use synth::synth_cohort;
pub use tuning::{log_range, nested_tune, GridSpec, TuneOutcome};

/// Repetition and fold counts with the base seed. Repetition `r` splits
/// with seed `seed + r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub repetitions: usize,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
}

impl CvPlan {
    pub fn from_config(cfg: &EvaluationConfig) -> Self {
        Self {
            repetitions: cfg.repetitions,
            outer_folds: cfg.outer_folds,
            inner_folds: cfg.inner_folds,
            seed: cfg.seed,
        }
    }

    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        self.seed.wrapping_add(repetition as u64)
    }

    /// Outer fold assignment per repetition.
    pub fn assignments(&self, labels: &[ClassLabel]) -> Result<Vec<Vec<usize>>, EvalError> {
        if self.repetitions == 0 {
            return Err(EvalError::Config("repetitions must be at least 1".into()));
        }
        (0..self.repetitions)
            .map(|r| stratified_folds(labels, self.outer_folds, self.repetition_seed(r)))
            .collect()
    }
}

/// What one member SVM learned from a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub task: String,
    pub params: HyperParams,
    pub tune_score: Option<f64>,
    pub degenerate_inner_folds: usize,
    pub failed_inner_fits: usize,
    /// Selected feature names, best first.
    pub features: Vec<String>,
    pub mask: SelectionMask,
    pub scaler: Scaler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub repetition: usize,
    pub fold: usize,
    pub scheme: Scheme,
    pub members: Vec<MemberRecord>,
    /// `(row index, prediction)` for every held-out row.
    pub predictions: Vec<(usize, Prediction)>,
}

/// Tunes every member on the training rows, trains the scheme and returns
/// it with what each member learned.
pub fn fit_scheme(
    m: &FeatureMatrix,
    train: &[usize],
    scheme: Scheme,
    grid: &GridSpec,
    inner_folds: usize,
    seed: u64,
    cfg: &Config,
) -> Result<(CompositeModel, Vec<MemberRecord>)> {
    let rows: Vec<&[f64]> = train.iter().map(|&i| m.rows[i].as_slice()).collect();
    let labels: Vec<ClassLabel> = train.iter().map(|&i| m.labels[i]).collect();
    for c in ClassLabel::ALL {
        if !labels.contains(&c) {
            return Err(EvalError::MissingClass(c.to_string()).into());
        }
    }
    let grid = grid.for_scheme(scheme, m.dim());
    let tasks = scheme.tasks();
    let outcomes: Vec<TuneOutcome> = tasks
        .par_iter()
        .map(|&t| nested_tune(&rows, &labels, t, &grid, inner_folds, seed, &cfg.svm))
        .collect::<Result<_>>()?;
    let hps: Vec<HyperParams> = outcomes.iter().map(|o| o.params).collect();
    let model = CompositeModel::train(
        scheme,
        &rows,
        &labels,
        &hps,
        &m.names,
        &cfg.svm,
        cfg.evaluation.stage1_tie,
    )?;
    let records = model
        .members()
        .into_iter()
        .zip(&tasks)
        .zip(&outcomes)
        .map(|((svm, task), o)| MemberRecord {
            task: task.name(),
            params: o.params,
            tune_score: o.score,
            degenerate_inner_folds: o.degenerate_folds,
            failed_inner_fits: o.failed_fits,
            features: svm.feature_names.clone(),
            mask: svm.mask.clone(),
            scaler: svm.scaler.clone(),
        })
        .collect();
    Ok((model, records))
}

/// One outer fold: fit on `train`, predict `test`.
#[allow(clippy::too_many_arguments)]
pub fn run_outer_fold(
    m: &FeatureMatrix,
    train: &[usize],
    test: &[usize],
    scheme: Scheme,
    grid: &GridSpec,
    plan: &CvPlan,
    repetition: usize,
    fold: usize,
    cfg: &Config,
) -> Result<FoldResult> {
    let seed = derive_seed(plan.seed, &[repetition as u64, fold as u64]);
    let (model, members) = fit_scheme(m, train, scheme, grid, plan.inner_folds, seed, cfg)?;
    let predictions = test
        .iter()
        .map(|&i| (i, model.predict(&m.rows[i])))
        .collect();
    Ok(FoldResult {
        repetition,
        fold,
        scheme,
        members,
        predictions,
    })
}

/// Train/test row indices of fold `fold` under an assignment.
pub fn split(assignment: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..assignment.len()).partition(|&i| assignment[i] != fold)
}

/// The full protocol for each scheme. Units (scheme, repetition, fold) run
/// in parallel and are merged in a fixed order, so the report does not
/// depend on scheduling. A failed fold aborts the run.
pub fn run_experiment(
    m: &FeatureMatrix,
    schemes: &[Scheme],
    cfg: &Config,
) -> Result<EvaluationReport> {
    if schemes.is_empty() {
        return Err(EvalError::NoScheme.into());
    }
    let plan = CvPlan::from_config(&cfg.evaluation);
    let grid = GridSpec::from_config(&cfg.evaluation)?;
    let assignments = plan.assignments(&m.labels)?;
    let units: Vec<(Scheme, usize, usize)> = schemes
        .iter()
        .flat_map(|&s| {
            (0..plan.repetitions).flat_map(move |r| (0..plan.outer_folds).map(move |f| (s, r, f)))
        })
        .collect();
    let results: Vec<FoldResult> = units
        .par_iter()
        .map(|&(scheme, r, f)| {
            let (train, test) = split(&assignments[r], f);
            run_outer_fold(m, &train, &test, scheme, &grid, &plan, r, f, cfg).map_err(|e| {
                Error::from(EvalError::Fold {
                    repetition: r,
                    fold: f,
                    source: Box::new(e),
                })
            })
        })
        .collect::<Result<_>>()?;

    let mut by_unit: HashMap<(Scheme, usize), Vec<FoldResult>> = HashMap::new();
    for fr in results {
        by_unit
            .entry((fr.scheme, fr.repetition))
            .or_default()
            .push(fr);
    }
    let mut reports = Vec::new();
    for &scheme in schemes {
        let mut repetitions = Vec::new();
        for r in 0..plan.repetitions {
            let folds = by_unit.remove(&(scheme, r)).unwrap_or_default();
            repetitions.push(pool_repetition(m, r, plan.repetition_seed(r), folds)?);
        }
        let summary =
            AccuracySummary::of(&repetitions.iter().map(|r| r.accuracies).collect::<Vec<_>>());
        reports.push(SchemeReport {
            scheme,
            title: scheme.title().to_string(),
            summary,
            repetitions,
        });
    }
    Ok(EvaluationReport::new(m, cfg, reports))
}

/// Pools fold predictions of one repetition; every row must be predicted
/// exactly once.
fn pool_repetition(
    m: &FeatureMatrix,
    repetition: usize,
    seed: u64,
    mut folds: Vec<FoldResult>,
) -> Result<RepetitionResult> {
    folds.sort_by_key(|f| f.fold);
    let mut slots: Vec<Option<(usize, Prediction)>> = vec![None; m.len()];
    for f in &folds {
        for (i, p) in &f.predictions {
            if slots[*i].replace((f.fold, p.clone())).is_some() {
                return Err(EvalError::Config(format!(
                    "recording `{}` predicted twice",
                    m.ids[*i]
                ))
                .into());
            }
        }
    }
    let mut predictions = Vec::with_capacity(m.len());
    for (i, slot) in slots.into_iter().enumerate() {
        let (fold, p) = slot.ok_or_else(|| {
            EvalError::Config(format!("recording `{}` never predicted", m.ids[i]))
        })?;
        predictions.push(RecordPrediction {
            id: m.ids[i].clone(),
            truth: m.labels[i],
            predicted: p.label,
            fold,
            decision_values: p.decision_values,
        });
    }
    let predicted: Vec<ClassLabel> = predictions.iter().map(|p| p.predicted).collect();
    let accuracies = GroupAccuracies::from_predictions(&predicted, &m.labels)?;
    Ok(RepetitionResult {
        repetition,
        seed,
        accuracies,
        folds: folds
            .into_iter()
            .map(|f| report::FoldSummary {
                fold: f.fold,
                test_size: f.predictions.len(),
                members: f.members,
            })
            .collect(),
        predictions,
    })
}

/// Final model of a scheme, tuned and trained on every row.
pub fn train_final_model(
    m: &FeatureMatrix,
    scheme: Scheme,
    cfg: &Config,
) -> Result<(CompositeModel, Vec<MemberRecord>)> {
    let plan = CvPlan::from_config(&cfg.evaluation);
    let grid = GridSpec::from_config(&cfg.evaluation)?;
    let all: Vec<usize> = (0..m.len()).collect();
    let seed = derive_seed(plan.seed, &[u64::MAX]);
    fit_scheme(m, &all, scheme, &grid, plan.inner_folds, seed, cfg)
}
