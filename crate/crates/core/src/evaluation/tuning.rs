use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::stratified_folds_relaxed;
use super::metrics::binary_balanced_accuracy;
use crate::classifiers::{Scheme, Task};
use crate::config::{EvaluationConfig, GridMode, SvmConfig};
use crate::dataset::ClassLabel;
use crate::error::{EvalError, Result, SvmError};
use crate::svm::{
    rbf_kernel, solve_dual_from, squared_distances, ClassWeights, HyperParams, Prepared,
    SolverParams,
};

/// Candidate values per hyperparameter; every combination is a grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub n_f: Vec<usize>,
}

/// `points` values from `lo` to `hi`, evenly spaced in log10. Integral
/// exponents give exact powers of ten.
pub fn log_range(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points)
        .map(|i| {
            let e = a + (b - a) * i as f64 / (points - 1) as f64;
            let r = e.round();
            if (e - r).abs() < 1e-9 {
                10f64.powi(r as i32)
            } else {
                10f64.powf(e)
            }
        })
        .collect()
}

impl GridSpec {
    pub fn from_config(cfg: &EvaluationConfig) -> Result<Self, EvalError> {
        let axis = |range: [f64; 2], points: usize, name: &str| -> Result<Vec<f64>, EvalError> {
            if !(range[0] > 0.0 && range[1] >= range[0] && range[1].is_finite()) {
                return Err(EvalError::Config(format!(
                    "{name} range must satisfy 0 < lo <= hi, got {range:?}"
                )));
            }
            Ok(match cfg.grid_mode {
                GridMode::LogRange => {
                    if points == 0 {
                        return Err(EvalError::EmptyGrid);
                    }
                    log_range(range[0], range[1], points)
                }
                GridMode::Endpoints => {
                    let mut v = vec![range[0], range[1]];
                    v.dedup();
                    v
                }
            })
        };
        let grid = Self {
            c: axis(cfg.c_range, cfg.c_points, "C")?,
            gamma: axis(cfg.gamma_range, cfg.gamma_points, "gamma")?,
            n_f: cfg.n_features.clone(),
        };
        if grid.is_empty() {
            return Err(EvalError::EmptyGrid);
        }
        Ok(grid)
    }

    /// The grid a scheme searches: every feature when it does no selection,
    /// otherwise the feature counts that fit `dim`.
    pub fn for_scheme(&self, scheme: Scheme, dim: usize) -> Self {
        let n_f = if scheme.selects_features() {
            self.n_f
                .iter()
                .copied()
                .filter(|&n| n >= 1 && n <= dim)
                .collect()
        } else {
            vec![dim]
        };
        Self {
            c: self.c.clone(),
            gamma: self.gamma.clone(),
            n_f,
        }
    }

    pub fn len(&self) -> usize {
        self.c.len() * self.gamma.len() * self.n_f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn sorted(&self) -> Self {
        let mut g = self.clone();
        g.c.sort_by(f64::total_cmp);
        g.c.dedup();
        g.gamma.sort_by(f64::total_cmp);
        g.gamma.dedup();
        g.n_f.sort();
        g.n_f.dedup();
        g
    }
}

/// Chosen point and its inner cross-validation score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub params: HyperParams,
    /// Mean inner balanced accuracy; absent when the grid had one point.
    pub score: Option<f64>,
    /// Inner folds lacking a class of the subtask (scored 0).
    pub degenerate_folds: usize,
    /// Grid evaluations that failed to converge or had no usable feature (scored 0).
    pub failed_fits: usize,
}

/// Inner cross-validation over the grid for one binary subtask of the
/// training rows. Points are visited by increasing C, then gamma, then
/// n_f, and only a strictly better mean score replaces the incumbent.
pub fn nested_tune<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[ClassLabel],
    task: Task,
    grid: &GridSpec,
    inner_folds: usize,
    seed: u64,
    cfg: &SvmConfig,
) -> Result<TuneOutcome> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid.into());
    }
    let grid = grid.sorted();
    if grid.len() == 1 {
        return Ok(TuneOutcome {
            params: HyperParams::new(grid.c[0], grid.gamma[0], grid.n_f[0]),
            score: None,
            degenerate_folds: 0,
            failed_fits: 0,
        });
    }
    let (idx, positive) = task.view(labels);
    let sub_rows: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_ref()).collect();
    let sub_labels: Vec<ClassLabel> = idx.iter().map(|&i| labels[i]).collect();
    let folds = stratified_folds_relaxed(&sub_labels, inner_folds, seed);

    let units: Vec<(usize, usize)> = (0..inner_folds)
        .flat_map(|f| (0..grid.n_f.len()).map(move |n| (f, n)))
        .collect();
    let results: Vec<Result<UnitScores>> = units
        .par_iter()
        .map(|&(f, ni)| {
            score_unit(
                &sub_rows,
                &positive,
                &folds,
                f,
                grid.n_f[ni],
                &grid,
                cfg,
                task,
            )
        })
        .collect();

    // totals[(ni * |gamma| + gi) * |C| + ci]
    let per_nf = grid.gamma.len() * grid.c.len();
    let mut totals = vec![0.0; grid.n_f.len() * per_nf];
    let mut degenerate = vec![false; inner_folds];
    let mut failed_fits = 0;
    for (&(f, ni), r) in units.iter().zip(results) {
        let unit = r?;
        degenerate[f] |= unit.degenerate;
        failed_fits += unit.failed;
        for (k, s) in unit.scores.iter().enumerate() {
            totals[ni * per_nf + k] += s;
        }
    }

    let mut best: Option<(f64, HyperParams)> = None;
    for (ci, &c) in grid.c.iter().enumerate() {
        for (gi, &gamma) in grid.gamma.iter().enumerate() {
            for (ni, &n_f) in grid.n_f.iter().enumerate() {
                let mean = totals[ni * per_nf + gi * grid.c.len() + ci] / inner_folds as f64;
                if best.is_none_or(|(s, _)| mean > s) {
                    best = Some((mean, HyperParams::new(c, gamma, n_f)));
                }
            }
        }
    }
    let (score, params) = best.expect("non-empty grid");
    Ok(TuneOutcome {
        params,
        score: Some(score),
        degenerate_folds: degenerate.iter().filter(|&&d| d).count(),
        failed_fits,
    })
}

struct UnitScores {
    /// Indexed `gi * |C| + ci`.
    scores: Vec<f64>,
    degenerate: bool,
    failed: usize,
}

#[allow(clippy::too_many_arguments)]
fn score_unit(
    rows: &[&[f64]],
    positive: &[bool],
    folds: &[usize],
    fold: usize,
    n_f: usize,
    grid: &GridSpec,
    cfg: &SvmConfig,
    task: Task,
) -> Result<UnitScores> {
    let cells = grid.gamma.len() * grid.c.len();
    let zeros = |degenerate, failed| UnitScores {
        scores: vec![0.0; cells],
        degenerate,
        failed,
    };
    let (mut tr_rows, mut tr_pos, mut va_rows, mut va_pos) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..rows.len() {
        if folds[i] == fold {
            va_rows.push(rows[i]);
            va_pos.push(positive[i]);
        } else {
            tr_rows.push(rows[i]);
            tr_pos.push(positive[i]);
        }
    }
    let has_both = |p: &[bool]| p.contains(&true) && p.contains(&false);
    if !has_both(&tr_pos) || !has_both(&va_pos) {
        log::warn!(
            "{}: inner fold {fold} lacks a class (train {}, validation {}); scored 0",
            task.name(),
            tr_pos.len(),
            va_pos.len()
        );
        return Ok(zeros(true, 0));
    }
    let prepared = match Prepared::fit(&tr_rows, &tr_pos, n_f, cfg) {
        Ok(p) => p,
        Err(SvmError::NoUsableFeature) => {
            log::warn!(
                "{}: inner fold {fold}, n_f = {n_f}: no usable feature; scored 0",
                task.name()
            );
            return Ok(zeros(false, cells));
        }
        Err(e) => return Err(e.into()),
    };
    let val: Vec<Vec<f64>> = va_rows.iter().map(|r| prepared.project(r)).collect();
    let d_train = squared_distances(&prepared.rows, &prepared.rows);
    let d_val = squared_distances(&val, &prepared.rows);
    let weights = ClassWeights::for_labels(&tr_pos, cfg.class_weighting);
    let y: Vec<f64> = tr_pos.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
    let solver = SolverParams::from_config(cfg);
    let n = y.len();

    let mut scores = Vec::with_capacity(cells);
    let mut failed = 0;
    for &gamma in &grid.gamma {
        let k_train = rbf_kernel(&d_train, gamma);
        let k_val = rbf_kernel(&d_val, gamma);
        let mut warm: Option<Vec<f64>> = None;
        for &c in &grid.c {
            let upper = weights.bounds(c, &tr_pos);
            match solve_dual_from(&k_train, &y, &upper, warm.as_deref(), &solver) {
                Ok(sol) => {
                    let coef: Vec<f64> = sol.alpha.iter().zip(&y).map(|(a, b)| a * b).collect();
                    let predicted: Vec<bool> = k_val
                        .chunks(n)
                        .map(|row| {
                            row.iter().zip(&coef).map(|(k, a)| k * a).sum::<f64>() - sol.rho >= 0.0
                        })
                        .collect();
                    scores.push(binary_balanced_accuracy(&predicted, &va_pos).unwrap_or(0.0));
                    warm = Some(sol.alpha);
                }
                Err(e @ SvmError::Convergence { .. }) => {
                    log::warn!("{}: inner fold {fold}, C = {c}, gamma = {gamma}, n_f = {n_f}: {e}; scored 0", task.name());
                    scores.push(0.0);
                    failed += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(UnitScores {
        scores,
        degenerate: false,
        failed,
    })
}
