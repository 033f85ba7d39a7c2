use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::ClassLabel;
use crate::error::EvalError;

/// Fold index per recording. Each class is shuffled with the seeded
/// generator and dealt round-robin; the dealing position carries over from
/// one class to the next so fold sizes also differ by at most one.
///
/// Errors when a present class has fewer recordings than folds.
pub fn stratified_folds(
    labels: &[ClassLabel],
    k: usize,
    seed: u64,
) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::Config(format!("need at least 2 folds, got {k}")));
    }
    for c in ClassLabel::ALL {
        let count = labels.iter().filter(|&&l| l == c).count();
        if count > 0 && count < k {
            return Err(EvalError::ClassTooSmall {
                class: c.to_string(),
                count,
                folds: k,
            });
        }
    }
    Ok(deal(labels, k, seed))
}

/// As [`stratified_folds`] but allows classes smaller than `k`, as happens
/// in inner folds; some folds then lack that class.
pub fn stratified_folds_relaxed(labels: &[ClassLabel], k: usize, seed: u64) -> Vec<usize> {
    deal(labels, k.max(1), seed)
}

fn deal(labels: &[ClassLabel], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for c in ClassLabel::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    folds
}

/// Stable 64-bit mix of a base seed and a path of indices (SplitMix64).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut z = base;
    for &p in path {
        z = z
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(p.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassLabel::*;

    fn cohort(n: usize, d: usize, a: usize) -> Vec<ClassLabel> {
        let mut v = vec![Neurotypical; n];
        v.extend(vec![Dysarthria; d]);
        v.extend(vec![AoS; a]);
        v
    }

    fn counts(labels: &[ClassLabel], folds: &[usize], k: usize) -> Vec<[usize; 3]> {
        let mut out = vec![[0; 3]; k];
        for (l, &f) in labels.iter().zip(folds) {
            out[f][l.index()] += 1;
        }
        out
    }

    #[test]
    fn study_cohort_shape() {
        let labels = cohort(29, 20, 10);
        let folds = stratified_folds(&labels, 5, 7).unwrap();
        for c in counts(&labels, &folds, 5) {
            assert!(c[0] == 5 || c[0] == 6, "{c:?}");
            assert_eq!(c[1], 4);
            assert_eq!(c[2], 2);
        }
    }

    #[test]
    fn one_per_fold() {
        let labels = vec![AoS; 5];
        let mut folds = stratified_folds(&labels, 5, 1).unwrap();
        folds.sort();
        assert_eq!(folds, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn seeded_and_too_small() {
        let labels = cohort(29, 20, 10);
        assert_eq!(
            stratified_folds(&labels, 5, 3).unwrap(),
            stratified_folds(&labels, 5, 3).unwrap()
        );
        assert_ne!(
            stratified_folds(&labels, 5, 3).unwrap(),
            stratified_folds(&labels, 5, 4).unwrap()
        );
        assert!(matches!(
            stratified_folds(&cohort(29, 20, 4), 5, 0),
            Err(EvalError::ClassTooSmall { count: 4, .. })
        ));
        assert_eq!(stratified_folds_relaxed(&cohort(10, 10, 3), 5, 0).len(), 23);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, &[1, 2]), derive_seed(0, &[2, 1]));
        assert_eq!(derive_seed(9, &[3]), derive_seed(9, &[3]));
    }

    proptest! {
        #[test]
        fn per_class_counts_differ_by_at_most_one(n in 5usize..40, d in 5usize..30, a in 5usize..15, k in 2usize..6, seed in any::<u64>()) {
            let labels = cohort(n, d, a);
            let folds = stratified_folds(&labels, k, seed).unwrap();
            let c = counts(&labels, &folds, k);
            for class in 0..3 {
                let lo = c.iter().map(|x| x[class]).min().unwrap();
                let hi = c.iter().map(|x| x[class]).max().unwrap();
                prop_assert!(hi - lo <= 1);
            }
            let sizes: Vec<usize> = c.iter().map(|x| x.iter().sum()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
