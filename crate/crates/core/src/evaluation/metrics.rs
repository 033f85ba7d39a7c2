use serde::{Deserialize, Serialize};

use crate::dataset::ClassLabel;
use crate::error::EvalError;

/// Accurately predicted count over group size for one class.
pub fn group_accuracy(
    predictions: &[ClassLabel],
    truths: &[ClassLabel],
    group: ClassLabel,
) -> Result<f64, EvalError> {
    let (hit, total) = tally(predictions, truths, |t| t == group, |p, t| p == t);
    if total == 0 {
        return Err(EvalError::EmptyGroup(group.to_string()));
    }
    Ok(hit as f64 / total as f64)
}

/// Patients predicted as either patient class, over all patients.
pub fn patient_accuracy(
    predictions: &[ClassLabel],
    truths: &[ClassLabel],
) -> Result<f64, EvalError> {
    let (hit, total) = tally(predictions, truths, ClassLabel::is_patient, |p, _| {
        p.is_patient()
    });
    if total == 0 {
        return Err(EvalError::EmptyGroup("patient".into()));
    }
    Ok(hit as f64 / total as f64)
}

pub fn balanced_accuracy(neurotypical: f64, dysarthria: f64, aos: f64) -> f64 {
    (neurotypical + dysarthria + aos) / 3.0
}

fn tally(
    predictions: &[ClassLabel],
    truths: &[ClassLabel],
    member: impl Fn(ClassLabel) -> bool,
    correct: impl Fn(ClassLabel, ClassLabel) -> bool,
) -> (usize, usize) {
    assert_eq!(
        predictions.len(),
        truths.len(),
        "predictions and truths differ in length"
    );
    let mut hit = 0;
    let mut total = 0;
    for (&p, &t) in predictions.iter().zip(truths) {
        if member(t) {
            total += 1;
            hit += usize::from(correct(p, t));
        }
    }
    (hit, total)
}

/// Correct / total counts behind a [`GroupAccuracies`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCount {
    pub correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupAccuracies {
    pub balanced: f64,
    pub neurotypical: f64,
    pub patient: f64,
    pub dysarthria: f64,
    pub aos: f64,
    pub counts: GroupCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub neurotypical: GroupCount,
    pub patient: GroupCount,
    pub dysarthria: GroupCount,
    pub aos: GroupCount,
}

impl GroupAccuracies {
    /// All five accuracies from one set of predictions.
    pub fn from_predictions(
        predictions: &[ClassLabel],
        truths: &[ClassLabel],
    ) -> Result<Self, EvalError> {
        use ClassLabel::*;
        let count = |member: &dyn Fn(ClassLabel) -> bool,
                     correct: &dyn Fn(ClassLabel, ClassLabel) -> bool| {
            let (c, t) = tally(predictions, truths, member, correct);
            GroupCount {
                correct: c,
                total: t,
            }
        };
        let neurotypical = group_accuracy(predictions, truths, Neurotypical)?;
        let dysarthria = group_accuracy(predictions, truths, Dysarthria)?;
        let aos = group_accuracy(predictions, truths, AoS)?;
        let patient = patient_accuracy(predictions, truths)?;
        Ok(Self {
            balanced: balanced_accuracy(neurotypical, dysarthria, aos),
            neurotypical,
            patient,
            dysarthria,
            aos,
            counts: GroupCounts {
                neurotypical: count(&|t| t == Neurotypical, &|p, t| p == t),
                patient: count(&ClassLabel::is_patient, &|p, _| p.is_patient()),
                dysarthria: count(&|t| t == Dysarthria, &|p, t| p == t),
                aos: count(&|t| t == AoS, &|p, t| p == t),
            },
        })
    }

    /// Values in table row order: balanced, neurotypical, patient, dysarthria, AoS.
    pub fn rows(&self) -> [f64; 5] {
        [
            self.balanced,
            self.neurotypical,
            self.patient,
            self.dysarthria,
            self.aos,
        ]
    }
}

pub const ROW_NAMES: [&str; 5] = ["Balanced", "Neurotypical", "Patient", "Dysarthria", "AoS"];

/// Mean of the two per-class recalls of a binary task.
pub fn binary_balanced_accuracy(predicted: &[bool], truth: &[bool]) -> Option<f64> {
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        if t {
            pos += 1;
            tp += usize::from(p);
        } else {
            neg += 1;
            tn += usize::from(!p);
        }
    }
    if pos == 0 || neg == 0 {
        return None;
    }
    Some(0.5 * (tp as f64 / pos as f64 + tn as f64 / neg as f64))
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
        }
    }

    /// `mean ± std` in percent with one decimal.
    pub fn percent(&self) -> String {
        format!("{:.1} ± {:.1}", 100.0 * self.mean, 100.0 * self.std)
    }
}

/// Mean ± std of each accuracy across repetitions or judges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub count: usize,
    pub balanced: MeanStd,
    pub neurotypical: MeanStd,
    pub patient: MeanStd,
    pub dysarthria: MeanStd,
    pub aos: MeanStd,
}

impl AccuracySummary {
    pub fn of(items: &[GroupAccuracies]) -> Self {
        let col =
            |f: fn(&GroupAccuracies) -> f64| MeanStd::of(&items.iter().map(f).collect::<Vec<_>>());
        Self {
            count: items.len(),
            balanced: col(|g| g.balanced),
            neurotypical: col(|g| g.neurotypical),
            patient: col(|g| g.patient),
            dysarthria: col(|g| g.dysarthria),
            aos: col(|g| g.aos),
        }
    }

    pub fn rows(&self) -> [MeanStd; 5] {
        [
            self.balanced,
            self.neurotypical,
            self.patient,
            self.dysarthria,
            self.aos,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassLabel::*;

    #[test]
    fn group_arithmetic() {
        let truths = vec![Dysarthria; 20];
        let mut preds = vec![Dysarthria; 11];
        preds.extend(vec![AoS; 9]);
        assert_eq!(group_accuracy(&preds, &truths, Dysarthria).unwrap(), 0.55);
        assert_eq!(group_accuracy(&truths, &truths, Dysarthria).unwrap(), 1.0);
        assert_eq!(
            group_accuracy(&[Neurotypical; 20], &truths, Dysarthria).unwrap(),
            0.0
        );
        assert!(matches!(
            group_accuracy(&preds, &truths, AoS),
            Err(EvalError::EmptyGroup(_))
        ));
    }

    #[test]
    fn patient_confusions_count() {
        let t = [Dysarthria, Dysarthria, AoS];
        assert!(
            (patient_accuracy(&[AoS, Dysarthria, Neurotypical], &t).unwrap() - 2.0 / 3.0).abs()
                < 1e-15
        );
        assert_eq!(patient_accuracy(&[Neurotypical; 3], &t).unwrap(), 0.0);
        assert_eq!(patient_accuracy(&t, &t).unwrap(), 1.0);
        assert!(patient_accuracy(&[Neurotypical], &[Neurotypical]).is_err());
    }

    #[test]
    fn balanced_table_row() {
        assert_eq!(balanced_accuracy(0.821, 0.750, 0.820), 0.797);
        assert_eq!(balanced_accuracy(1.0, 1.0, 1.0), 1.0);
        assert_eq!(balanced_accuracy(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn mean_std_formatting() {
        let m = MeanStd::of(&[0.75, 0.85]);
        assert_eq!(m.percent(), "80.0 ± 5.0");
        assert_eq!(MeanStd::of(&[1.0; 4]).percent(), "100.0 ± 0.0");
    }

    #[test]
    fn binary_balanced() {
        assert_eq!(
            binary_balanced_accuracy(&[true, false, false, false], &[true, true, false, false]),
            Some(0.75)
        );
        assert_eq!(binary_balanced_accuracy(&[true], &[true]), None);
    }

    fn label() -> impl Strategy<Value = ClassLabel> {
        prop_oneof![Just(Neurotypical), Just(Dysarthria), Just(AoS)]
    }

    proptest! {
        #[test]
        fn identities(pairs in prop::collection::vec((label(), label()), 3..80)) {
            let mut truths: Vec<ClassLabel> = pairs.iter().map(|p| p.0).collect();
            let mut preds: Vec<ClassLabel> = pairs.iter().map(|p| p.1).collect();
            truths.extend(ClassLabel::ALL);
            preds.extend(ClassLabel::ALL);
            let g = GroupAccuracies::from_predictions(&preds, &truths).unwrap();
            prop_assert_eq!(g.balanced, (g.neurotypical + g.dysarthria + g.aos) / 3.0);
            let (td, ta) = (g.counts.dysarthria.total as f64, g.counts.aos.total as f64);
            prop_assert!(g.patient >= (td * g.dysarthria + ta * g.aos) / (td + ta) - 1e-12);
            for v in g.rows() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
