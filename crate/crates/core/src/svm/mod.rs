//! Soft-margin binary SVM with an RBF kernel.
//!
//! [`train_svm`] is the single entry point: it ranks features by ANOVA F on
//! the training rows, keeps the top `n_f` with non-zero variance, fits a
//! z-score scaler, and solves the weighted dual with [`solve_dual`].

pub mod artifact;
pub mod solver;

use serde::{Deserialize, Serialize};

use crate::config::{ClassWeighting, SvmConfig};
use crate::error::{ArtifactError, SvmError};
use crate::selection::{select_top, SelectionMask};

pub use solver::{dual_objective, solve_dual, solve_dual_from, DualSolution, SolverParams};

/// Artifact kind tag for a single binary model.
pub const ARTIFACT_KIND: &str = "svm";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub c: f64,
    pub gamma: f64,
    pub n_f: usize,
}

impl HyperParams {
    pub fn new(c: f64, gamma: f64, n_f: usize) -> Self {
        Self { c, gamma, n_f }
    }

    pub fn validate(&self, dim: usize) -> Result<(), SvmError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(SvmError::HyperParams(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(SvmError::HyperParams(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.n_f == 0 || self.n_f > dim {
            return Err(SvmError::HyperParams(format!(
                "n_f must lie in 1..={dim}, got {}",
                self.n_f
            )));
        }
        Ok(())
    }
}

/// Per-feature affine map fitted on training rows, over masked features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn transform(&self, masked: &[f64]) -> Vec<f64> {
        masked
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Population mean and std of column `j`.
fn column_moments<R: AsRef<[f64]>>(rows: &[R], j: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.as_ref()[j]).sum::<f64>() / n;
    let var = rows
        .iter()
        .map(|r| (r.as_ref()[j] - mean).powi(2))
        .sum::<f64>()
        / n;
    (mean, var.sqrt())
}

/// Which labels the two sides of the decision function stand for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMap {
    pub positive: String,
    pub negative: String,
}

impl ClassMap {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Self {
        Self {
            positive: positive.into(),
            negative: negative.into(),
        }
    }
}

impl Default for ClassMap {
    fn default() -> Self {
        Self::new("positive", "negative")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub positive: f64,
    pub negative: f64,
}

impl ClassWeights {
    /// `n / (2 n_c)` per class, or unit weights.
    pub fn for_labels(positive: &[bool], weighting: ClassWeighting) -> Self {
        match weighting {
            ClassWeighting::None => Self {
                positive: 1.0,
                negative: 1.0,
            },
            ClassWeighting::InverseFrequency => {
                let n = positive.len() as f64;
                let n_pos = positive.iter().filter(|&&p| p).count().max(1) as f64;
                let n_neg =
                    (positive.len() - positive.iter().filter(|&&p| p).count()).max(1) as f64;
                Self {
                    positive: n / (2.0 * n_pos),
                    negative: n / (2.0 * n_neg),
                }
            }
        }
    }

    pub fn bounds(&self, c: f64, positive: &[bool]) -> Vec<f64> {
        positive
            .iter()
            .map(|&p| c * if p { self.positive } else { self.negative })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub n_train: usize,
    pub iterations: usize,
    pub kkt_gap: f64,
    pub objective: f64,
}

/// Masked, standardized training view shared by every (C, gamma) pair.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub mask: SelectionMask,
    pub scaler: Scaler,
    pub rows: Vec<Vec<f64>>,
}

impl Prepared {
    /// Ranks, masks and standardizes `rows`. Top-ranked features with zero
    /// training variance are removed from the mask.
    pub fn fit<R: AsRef<[f64]>>(
        rows: &[R],
        positive: &[bool],
        n_f: usize,
        cfg: &SvmConfig,
    ) -> Result<Self, SvmError> {
        check_rows(rows, positive)?;
        let dim = rows[0].as_ref().len();
        // F is undefined below three rows; only the full set can be used then.
        let mut mask = if rows.len() < 3 && n_f == dim {
            SelectionMask {
                indices: (0..dim).collect(),
                scores: vec![f64::NAN; dim],
                n_f,
            }
        } else {
            select_top(rows, positive, n_f)?
        };
        let mut mean = Vec::new();
        let mut std = Vec::new();
        mask.indices.retain(|&j| {
            let (m, s) = column_moments(rows, j);
            let usable = s > 1e-12 * m.abs().max(f64::MIN_POSITIVE);
            if usable {
                if cfg.standardize {
                    mean.push(m);
                    std.push(s);
                } else {
                    mean.push(0.0);
                    std.push(1.0);
                }
            }
            usable
        });
        if mask.indices.is_empty() {
            return Err(SvmError::NoUsableFeature);
        }
        mask.n_f = mask.indices.len();
        let scaler = Scaler { mean, std };
        let scaled = rows
            .iter()
            .map(|r| scaler.transform(&gather(r.as_ref(), &mask.indices)))
            .collect();
        Ok(Self {
            mask,
            scaler,
            rows: scaled,
        })
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.scaler.transform(&gather(x, &self.mask.indices))
    }
}

fn gather(x: &[f64], indices: &[usize]) -> Vec<f64> {
    indices.iter().map(|&j| x[j]).collect()
}

fn check_rows<R: AsRef<[f64]>>(rows: &[R], positive: &[bool]) -> Result<(), SvmError> {
    if rows.is_empty() || rows.len() != positive.len() {
        return Err(SvmError::BadShape);
    }
    let dim = rows[0].as_ref().len();
    if dim == 0 || rows.iter().any(|r| r.as_ref().len() != dim) {
        return Err(SvmError::BadShape);
    }
    if rows
        .iter()
        .any(|r| r.as_ref().iter().any(|v| !v.is_finite()))
    {
        return Err(SvmError::NonFinite);
    }
    if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
        return Err(SvmError::SingleClass);
    }
    Ok(())
}

/// Row-major matrix of squared Euclidean distances between `a` and `b`.
pub fn squared_distances(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for z in b {
            out.push(x.iter().zip(z).map(|(p, q)| (p - q) * (p - q)).sum());
        }
    }
    out
}

pub fn rbf_kernel(distances: &[f64], gamma: f64) -> Vec<f64> {
    distances.iter().map(|d| (-gamma * d).exp()).collect()
}

/// A trained binary model; immutable and shareable across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: HyperParams,
    pub class_map: ClassMap,
    pub class_weights: ClassWeights,
    pub mask: SelectionMask,
    /// Names of the features in `mask.indices`, in the same order.
    pub feature_names: Vec<String>,
    pub scaler: Scaler,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub fit: FitSummary,
}

impl SvmModel {
    /// `f(x) = sum_i alpha_i y_i K(s_i, scale(mask(x))) + b` for a full feature vector.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        let z = self.scaler.transform(&gather(x, &self.mask.indices));
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, coef)| {
                let d: f64 = sv.iter().zip(&z).map(|(p, q)| (p - q) * (p - q)).sum();
                coef * (-self.params.gamma * d).exp()
            })
            .sum::<f64>()
            + self.bias
    }

    /// Positive side, ties included.
    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision_value(x) >= 0.0
    }

    pub fn to_artifact(&self) -> Result<String, ArtifactError> {
        artifact::seal(ARTIFACT_KIND, self)
    }

    pub fn from_artifact(text: &str) -> Result<Self, ArtifactError> {
        artifact::unseal(ARTIFACT_KIND, text)
    }
}

pub fn save_model(m: &SvmModel) -> Result<Vec<u8>, ArtifactError> {
    m.to_artifact().map(String::into_bytes)
}

pub fn load_model(bytes: &[u8]) -> Result<SvmModel, ArtifactError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ArtifactError::Checksum)?;
    SvmModel::from_artifact(text)
}

/// Solves the weighted dual on a precomputed kernel over prepared rows.
pub fn solve_prepared(
    kernel: &[f64],
    positive: &[bool],
    c: f64,
    weights: ClassWeights,
    cfg: &SvmConfig,
) -> Result<DualSolution, SvmError> {
    let y: Vec<f64> = positive
        .iter()
        .map(|&p| if p { 1.0 } else { -1.0 })
        .collect();
    let upper = weights.bounds(c, positive);
    solve_dual(kernel, &y, &upper, &SolverParams::from_config(cfg))
}

/// Trains on full feature rows; `positive[i]` marks the +1 side.
pub fn train_svm<R: AsRef<[f64]>>(
    rows: &[R],
    positive: &[bool],
    hp: &HyperParams,
    feature_names: &[String],
    class_map: ClassMap,
    cfg: &SvmConfig,
) -> Result<SvmModel, SvmError> {
    check_rows(rows, positive)?;
    let dim = rows[0].as_ref().len();
    if feature_names.len() != dim {
        return Err(SvmError::BadShape);
    }
    hp.validate(dim)?;
    let prepared = Prepared::fit(rows, positive, hp.n_f, cfg)?;
    let weights = ClassWeights::for_labels(positive, cfg.class_weighting);
    let kernel = rbf_kernel(&squared_distances(&prepared.rows, &prepared.rows), hp.gamma);
    let sol = solve_prepared(&kernel, positive, hp.c, weights, cfg)?;
    Ok(assemble(
        prepared,
        positive,
        *hp,
        feature_names,
        class_map,
        weights,
        &sol,
    ))
}

fn assemble(
    prepared: Prepared,
    positive: &[bool],
    params: HyperParams,
    feature_names: &[String],
    class_map: ClassMap,
    class_weights: ClassWeights,
    sol: &DualSolution,
) -> SvmModel {
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, row) in prepared.rows.into_iter().enumerate() {
        if sol.alpha[i] > 0.0 {
            support_vectors.push(row);
            dual_coefs.push(if positive[i] {
                sol.alpha[i]
            } else {
                -sol.alpha[i]
            });
        }
    }
    let feature_names = prepared
        .mask
        .indices
        .iter()
        .map(|&j| feature_names[j].clone())
        .collect();
    SvmModel {
        params,
        class_map,
        class_weights,
        mask: prepared.mask,
        feature_names,
        scaler: prepared.scaler,
        support_vectors,
        dual_coefs,
        bias: -sol.rho,
        fit: FitSummary {
            n_train: positive.len(),
            iterations: sol.iterations,
            kkt_gap: sol.gap,
            objective: sol.objective,
        },
    }
}
