//! Univariate feature ranking by the one-way ANOVA F-value against a binary
//! grouping, and top-n selection.

use serde::{Deserialize, Serialize};

use crate::error::SelectionError;

/// Selected feature positions, best first, with the F-value of every feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMask {
    pub indices: Vec<usize>,
    #[serde(with = "crate::svm::artifact::extended_floats")]
    pub scores: Vec<f64>,
    pub n_f: usize,
}

/// One-way ANOVA F for two groups (`true` / `false`).
///
/// Returns `+inf` when the groups differ but have no within-group spread,
/// and `0` when there is no spread at all.
pub fn anova_f(values: &[f64], groups: &[bool]) -> Result<f64, SelectionError> {
    assert_eq!(
        values.len(),
        groups.len(),
        "values and groups differ in length"
    );
    let n = values.len();
    let n1 = groups.iter().filter(|&&g| g).count();
    let n0 = n - n1;
    if n0 == 0 {
        return Err(SelectionError::EmptyGroup(0));
    }
    if n1 == 0 {
        return Err(SelectionError::EmptyGroup(1));
    }
    if n < 3 {
        return Err(SelectionError::TooFewObservations(n));
    }
    let (mut s0, mut s1) = (0.0, 0.0);
    for (&v, &g) in values.iter().zip(groups) {
        if g {
            s1 += v;
        } else {
            s0 += v;
        }
    }
    let (m0, m1) = (s0 / n0 as f64, s1 / n1 as f64);
    let grand = (s0 + s1) / n as f64;
    let ssb = n0 as f64 * (m0 - grand).powi(2) + n1 as f64 * (m1 - grand).powi(2);
    let ssw: f64 = values
        .iter()
        .zip(groups)
        .map(|(&v, &g)| (v - if g { m1 } else { m0 }).powi(2))
        .sum();
    // Rounding residue of the group means.
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let negligible = n as f64 * (4.0 * f64::EPSILON * scale).powi(2);
    let ssw_zero = ssw <= negligible;
    let ssb_zero = ssb <= negligible;
    Ok(match (ssb_zero, ssw_zero) {
        (true, true) => 0.0,
        (false, true) => f64::INFINITY,
        (true, false) => 0.0,
        (false, false) => (ssb / 1.0) / (ssw / (n - 2) as f64),
    })
}

/// F-value of every column over the given rows.
pub fn anova_scores<R: AsRef<[f64]>>(
    rows: &[R],
    groups: &[bool],
) -> Result<Vec<f64>, SelectionError> {
    let dim = rows.first().map_or(0, |r| r.as_ref().len());
    let mut column = vec![0.0; rows.len()];
    (0..dim)
        .map(|j| {
            for (slot, r) in column.iter_mut().zip(rows) {
                *slot = r.as_ref()[j];
            }
            if column.iter().any(|v| !v.is_finite()) {
                return Err(SelectionError::NonFinite);
            }
            anova_f(&column, groups)
        })
        .collect()
}

/// Feature positions ordered by descending F, ties to the lower index.
pub fn rank_features(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

pub fn mask_from_scores(scores: Vec<f64>, n_f: usize) -> Result<SelectionMask, SelectionError> {
    if n_f == 0 || n_f > scores.len() {
        return Err(SelectionError::CountOutOfRange {
            n_f,
            available: scores.len(),
        });
    }
    let mut indices = rank_features(&scores);
    indices.truncate(n_f);
    Ok(SelectionMask {
        indices,
        scores,
        n_f,
    })
}

/// The `n_f` features with the highest F-value on these rows.
pub fn select_top<R: AsRef<[f64]>>(
    rows: &[R],
    groups: &[bool],
    n_f: usize,
) -> Result<SelectionMask, SelectionError> {
    let dim = rows.first().map_or(0, |r| r.as_ref().len());
    if n_f == 0 || n_f > dim {
        return Err(SelectionError::CountOutOfRange {
            n_f,
            available: dim,
        });
    }
    mask_from_scores(anova_scores(rows, groups)?, n_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    /// Textbook one-way ANOVA with explicit group lists.
    fn oracle_f(a: &[f64], b: &[f64]) -> f64 {
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let all: Vec<f64> = a.iter().chain(b).copied().collect();
        let g = mean(&all);
        let ssb = a.len() as f64 * (mean(a) - g).powi(2) + b.len() as f64 * (mean(b) - g).powi(2);
        let ssw: f64 = a.iter().map(|x| (x - mean(a)).powi(2)).sum::<f64>()
            + b.iter().map(|x| (x - mean(b)).powi(2)).sum::<f64>();
        (ssb / 1.0) / (ssw / (all.len() - 2) as f64)
    }

    #[test]
    fn hand_computed_example() {
        // Means 2 and 3 around 2.5: SSB = 1.5 on 1 df, SSW = 2 + 2 on 4 df, F = 1.5 / 1.
        let f = anova_f(
            &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0],
            &[false, false, false, true, true, true],
        )
        .unwrap();
        assert!((f - oracle_f(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0])).abs() < 1e-12);
        assert!((f - 1.5).abs() < 1e-12, "{f}");
    }

    #[test]
    fn degenerate_spreads() {
        let g = [false, false, true, true];
        assert_eq!(anova_f(&[1.0, 1.0, 1.0, 1.0], &g).unwrap(), 0.0);
        assert_eq!(anova_f(&[1.0, 1.0, 2.0, 2.0], &g).unwrap(), f64::INFINITY);
        assert_eq!(anova_f(&[0.1, 0.1, 0.7, 0.7], &g).unwrap(), f64::INFINITY);
        assert_eq!(anova_f(&[1.0, 3.0, 3.0, 1.0], &g).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            anova_f(&[1.0, 2.0, 3.0], &[true; 3]),
            Err(SelectionError::EmptyGroup(0))
        );
        assert_eq!(
            anova_f(&[1.0, 2.0], &[true, false]),
            Err(SelectionError::TooFewObservations(2))
        );
        let rows = vec![vec![1.0, 2.0]; 4];
        assert!(matches!(
            select_top(&rows, &[true, false, true, false], 3),
            Err(SelectionError::CountOutOfRange {
                n_f: 3,
                available: 2
            })
        ));
        assert!(select_top(&rows, &[true, false, true, false], 0).is_err());
    }

    #[test]
    fn finds_the_two_informative_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200;
        let mut rows = Vec::new();
        let mut groups = Vec::new();
        for g in [false, true] {
            for _ in 0..n {
                let mut r: Vec<f64> = (0..28).map(|_| StandardNormal.sample(&mut rng)).collect();
                if g {
                    r[3] += 2.0;
                    r[7] -= 1.5;
                }
                rows.push(r);
                groups.push(g);
            }
        }
        let mask = select_top(&rows, &groups, 2).unwrap();
        let mut idx = mask.indices.clone();
        idx.sort();
        assert_eq!(idx, vec![3, 7]);
        assert_eq!(mask.scores.len(), 28);
    }

    #[test]
    fn exhaustive_selection_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let groups: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let mut r: Vec<f64> = (0..28).map(|_| rng.random::<f64>()).collect();
                r[9] = r[2];
                r
            })
            .collect();
        let mask = select_top(&rows, &groups, 28).unwrap();
        let mut all = mask.indices.clone();
        all.sort();
        assert_eq!(all, (0..28).collect::<Vec<_>>());
        let p2 = mask.indices.iter().position(|&i| i == 2).unwrap();
        let p9 = mask.indices.iter().position(|&i| i == 9).unwrap();
        assert_eq!(p9, p2 + 1);
    }

    #[test]
    fn infinite_scores_rank_first() {
        let order = rank_features(&[1.0, f64::INFINITY, 5.0, f64::INFINITY, 0.0]);
        assert_eq!(order, vec![1, 3, 2, 0, 4]);
    }

    proptest! {
        #[test]
        fn affine_invariance(seed in any::<u64>(), a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], b in -100.0f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..15).map(|_| rng.random::<f64>() * 10.0).collect();
            let groups: Vec<bool> = (0..15).map(|i| i < 6).collect();
            let f = anova_f(&x, &groups).unwrap();
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let g = anova_f(&y, &groups).unwrap();
            prop_assert!((f - g).abs() <= 1e-9 * f.max(1.0));
        }

        #[test]
        fn selected_dominate_unselected(seed in any::<u64>(), n_f in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..12).map(|_| (0..8).map(|_| rng.random::<f64>()).collect()).collect();
            let groups: Vec<bool> = (0..12).map(|i| i % 3 == 0).collect();
            let mask = select_top(&rows, &groups, n_f).unwrap();
            let worst_selected = mask.indices.iter().map(|&i| mask.scores[i]).fold(f64::INFINITY, f64::min);
            for j in (0..8).filter(|j| !mask.indices.contains(j)) {
                prop_assert!(mask.scores[j] <= worst_selected);
            }
        }
    }
}
