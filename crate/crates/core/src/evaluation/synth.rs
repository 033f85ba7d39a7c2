use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::ClassLabel;
use crate::error::EvalError;
use crate::features::{FeatureMatrix, FEATURE_DIM, FEATURE_NAMES};

/// Features on which patients differ from neurotypical speakers.
pub const STAGE1_FEATURES: [usize; 5] = [0, 4, 14, 15, 24];
/// Features on which AoS differs from dysarthria.
pub const STAGE2_FEATURES: [usize; 5] = [5, 9, 12, 13, 25];

/// Per-feature location and spread, so the columns carry mixed units.
fn column_scale(j: usize) -> (f64, f64) {
    let spread = [0.5, 1.0, 20.0, 100.0][j % 4];
    (10.0 * j as f64, spread)
}

/// Gaussian cohort over the 28 named features.
///
/// Every value is `mu_j + sigma_j (z + shift)` with the same standard-normal
/// draws `z` for any separation, so cohorts differing only in separation
/// share ids and noise. Patients are shifted by `separation` on
/// [`STAGE1_FEATURES`], AoS additionally on [`STAGE2_FEATURES`].
pub fn synth_cohort(
    seed: u64,
    counts: [usize; 3],
    separation: f64,
) -> Result<FeatureMatrix, EvalError> {
    if counts.iter().any(|&n| n < 5) {
        return Err(EvalError::Cohort(format!(
            "need at least 5 recordings per class, got {counts:?}"
        )));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(EvalError::Cohort(format!(
            "separation must be finite and >= 0, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (c, &n) in ClassLabel::ALL.iter().zip(&counts) {
        for i in 0..n {
            let mut row = Vec::with_capacity(FEATURE_DIM);
            for j in 0..FEATURE_DIM {
                let z: f64 = StandardNormal.sample(&mut rng);
                let mut shift = 0.0;
                if c.is_patient() && STAGE1_FEATURES.contains(&j) {
                    shift += separation;
                }
                if *c == ClassLabel::AoS && STAGE2_FEATURES.contains(&j) {
                    shift += separation;
                }
                let (mu, sigma) = column_scale(j);
                row.push(mu + sigma * (z + shift));
            }
            ids.push(format!("{}-{:03}", c.as_str(), i + 1));
            labels.push(*c);
            rows.push(row);
        }
    }
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    FeatureMatrix::new(ids, labels, names, rows).map_err(|e| EvalError::Cohort(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let a = synth_cohort(4, [29, 20, 10], 2.0).unwrap();
        assert_eq!(a.len(), 59);
        assert_eq!(a.dim(), 28);
        assert_eq!(a.class_counts(), [29, 20, 10]);
        assert_eq!(a, synth_cohort(4, [29, 20, 10], 2.0).unwrap());
        assert_ne!(a, synth_cohort(5, [29, 20, 10], 2.0).unwrap());
    }

    #[test]
    fn separation_only_moves_designated_features() {
        let a = synth_cohort(1, [6, 6, 6], 0.0).unwrap();
        let b = synth_cohort(1, [6, 6, 6], 8.0).unwrap();
        assert_eq!(a.ids, b.ids);
        for ((ra, rb), l) in a.rows.iter().zip(&b.rows).zip(&a.labels) {
            for j in 0..FEATURE_DIM {
                let sigma = column_scale(j).1;
                let mut expected = 0.0;
                if l.is_patient() && STAGE1_FEATURES.contains(&j) {
                    expected += 8.0 * sigma;
                }
                if *l == ClassLabel::AoS && STAGE2_FEATURES.contains(&j) {
                    expected += 8.0 * sigma;
                }
                assert!((rb[j] - ra[j] - expected).abs() < 1e-9 * sigma.max(1.0) * 100.0);
            }
        }
    }

    #[test]
    fn invalid_requests() {
        assert!(synth_cohort(0, [4, 10, 10], 1.0).is_err());
        assert!(synth_cohort(0, [10, 10, 10], -1.0).is_err());
        assert!(synth_cohort(0, [10, 10, 10], f64::NAN).is_err());
    }
}
