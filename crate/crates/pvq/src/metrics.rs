//! Multi-class evaluation metrics over an explicit label universe.
//!
//! The confusion matrix is indexed `counts[predicted][actual]`. The universe
//! must be declared up front (the union of train and test labels), so classes
//! that appear only in the test set are scored instead of silently dropped.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::data::LabelVector;
use crate::error::{Error, Result};

/// k x k count matrix, rows = predicted class, columns = actual class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<u64>,
    labels: Vec<String>,
}

impl ConfusionMatrix {
    /// Tallies predictions against truth. Every label must belong to the
    /// declared universe; an unknown label is an error so extra test-set
    /// classes have to be declared, never ignored.
    pub fn from_labels(
        truth: &LabelVector,
        pred: &LabelVector,
        universe: &[String],
    ) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::invalid(format!(
                "truth has {} labels but predictions have {}",
                truth.len(),
                pred.len()
            )));
        }
        let index: HashMap<&str, usize> =
            universe.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        if index.len() != universe.len() {
            return Err(Error::invalid("label universe contains duplicates"));
        }
        let k = universe.len();
        let mut counts = vec![0u64; k * k];
        for i in 0..truth.len() {
            let t = *index.get(truth.get(i)).ok_or_else(|| {
                Error::invalid(format!("truth label {:?} not in universe", truth.get(i)))
            })?;
            let p = *index.get(pred.get(i)).ok_or_else(|| {
                Error::invalid(format!("predicted label {:?} not in universe", pred.get(i)))
            })?;
            counts[p * k + t] += 1;
        }
        Ok(Self { counts, labels: universe.to_vec() })
    }

    /// Builds a matrix from raw counts (row-major, rows = predicted).
    pub fn from_counts(counts: Vec<Vec<u64>>, labels: Vec<String>) -> Result<Self> {
        let k = labels.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("counts must be k x k for k labels"));
        }
        Ok(Self { counts: counts.concat(), labels })
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn count(&self, predicted: usize, actual: usize) -> u64 {
        self.counts[predicted * self.k() + actual]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn row_sum(&self, predicted: usize) -> u64 {
        let k = self.k();
        self.counts[predicted * k..(predicted + 1) * k].iter().sum()
    }

    fn col_sum(&self, actual: usize) -> u64 {
        (0..self.k()).map(|p| self.count(p, actual)).sum()
    }

    fn require_nonempty(&self) -> Result<u64> {
        match self.total() {
            0 => Err(Error::invalid("confusion matrix has no scored instances")),
            n => Ok(n),
        }
    }

    /// Fraction of instances on the diagonal.
    pub fn accuracy(&self) -> Result<f64> {
        let n = self.require_nonempty()?;
        let correct: u64 = (0..self.k()).map(|i| self.count(i, i)).sum();
        Ok(correct as f64 / n as f64)
    }

    /// Unweighted mean of per-class recall over classes with at least one
    /// true instance; unpopulated classes are excluded from the mean.
    pub fn macro_recall(&self) -> Result<f64> {
        self.require_nonempty()?;
        let mut sum = 0.0;
        let mut populated = 0usize;
        for c in 0..self.k() {
            let t = self.col_sum(c);
            if t > 0 {
                sum += self.count(c, c) as f64 / t as f64;
                populated += 1;
            }
        }
        if populated == 0 {
            return Err(Error::invalid("no class has a true instance"));
        }
        Ok(sum / populated as f64)
    }

    /// Per-class precision weighted by true-class frequency. A class that is
    /// never predicted contributes precision 0 with its truth weight.
    pub fn weighted_precision(&self) -> Result<f64> {
        let n = self.require_nonempty()?;
        let mut sum = 0.0;
        for c in 0..self.k() {
            let predicted = self.row_sum(c);
            if predicted == 0 {
                continue;
            }
            let weight = self.col_sum(c) as f64 / n as f64;
            sum += weight * (self.count(c, c) as f64 / predicted as f64);
        }
        Ok(sum)
    }

    /// Defined here as macro recall (mean per-class recall over populated
    /// classes); the definition is echoed in serialized reports.
    pub fn balanced_accuracy(&self) -> Result<f64> {
        self.macro_recall()
    }

    /// Generalized (multi-class) Matthews correlation coefficient, the R_K
    /// statistic. Degenerate denominators (all predictions or all truths in
    /// one class) return 0.
    pub fn mcc(&self) -> Result<f64> {
        let n = self.require_nonempty()? as f64;
        let k = self.k();
        let correct: u64 = (0..k).map(|i| self.count(i, i)).sum();
        let c = correct as f64;
        let mut pt = 0.0;
        let mut pp = 0.0;
        let mut tt = 0.0;
        for i in 0..k {
            let p = self.row_sum(i) as f64;
            let t = self.col_sum(i) as f64;
            pt += p * t;
            pp += p * p;
            tt += t * t;
        }
        let den2 = (n * n - pp) * (n * n - tt);
        if den2 <= 0.0 {
            return Ok(0.0);
        }
        Ok((c * n - pt) / den2.sqrt())
    }

    /// All five reported metrics at once.
    pub fn metric_set(&self) -> Result<MetricSet> {
        Ok(MetricSet {
            accuracy: self.accuracy()?,
            macro_recall: self.macro_recall()?,
            weighted_precision: self.weighted_precision()?,
            balanced_accuracy: self.balanced_accuracy()?,
            mcc: self.mcc()?,
        })
    }
}

/// The five metrics reported for every classifier run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub accuracy: f64,
    pub macro_recall: f64,
    pub weighted_precision: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked 2-class fixture: truth has five of each class, predictions
    /// get all of class a right and two of class b wrong.
    /// counts[predicted][actual] = [[5, 2], [0, 3]].
    fn fixture() -> ConfusionMatrix {
        let truth = LabelVector::from_strs(&["a", "a", "a", "a", "a", "b", "b", "b", "b", "b"]);
        let pred = LabelVector::from_strs(&["a", "a", "a", "a", "a", "a", "a", "b", "b", "b"]);
        ConfusionMatrix::from_labels(&truth, &pred, &["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn tallies_by_predicted_row_actual_column() {
        let m = fixture();
        assert_eq!(m.count(0, 0), 5);
        assert_eq!(m.count(0, 1), 2);
        assert_eq!(m.count(1, 0), 0);
        assert_eq!(m.count(1, 1), 3);
    }

    #[test]
    fn identity_and_off_diagonal_tallies() {
        let truth = LabelVector::from_strs(&["a", "b"]);
        let pred = LabelVector::from_strs(&["a", "b"]);
        let u = vec!["a".to_string(), "b".to_string()];
        let m = ConfusionMatrix::from_labels(&truth, &pred, &u).unwrap();
        assert_eq!((m.count(0, 0), m.count(1, 1)), (1, 1));
        assert_eq!(m.accuracy().unwrap(), 1.0);

        let wrong = ConfusionMatrix::from_labels(
            &LabelVector::from_strs(&["a", "a"]),
            &LabelVector::from_strs(&["b", "b"]),
            &u,
        )
        .unwrap();
        assert_eq!(wrong.count(1, 0), 2);
        assert_eq!(wrong.accuracy().unwrap(), 0.0);
    }

    #[test]
    fn three_class_tally() {
        let truth = LabelVector::from_strs(&["a", "b", "b", "c"]);
        let pred = LabelVector::from_strs(&["a", "b", "c", "c"]);
        let u: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let m = ConfusionMatrix::from_labels(&truth, &pred, &u).unwrap();
        assert_eq!((m.count(0, 0), m.count(1, 1), m.count(2, 2)), (1, 1, 1));
        assert_eq!(m.count(2, 1), 1);
    }

    #[test]
    fn label_outside_universe_is_rejected() {
        let truth = LabelVector::from_strs(&["a", "z"]);
        let pred = LabelVector::from_strs(&["a", "a"]);
        let u = vec!["a".to_string(), "b".to_string()];
        assert!(ConfusionMatrix::from_labels(&truth, &pred, &u).is_err());
    }

    #[test]
    fn accuracy_fixture() {
        assert!((fixture().accuracy().unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn macro_recall_fixture() {
        // recall(a) = 5/5, recall(b) = 3/5.
        assert!((fixture().macro_recall().unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn macro_recall_excludes_unpopulated_classes() {
        let truth = LabelVector::from_strs(&["a", "a", "b", "b"]);
        let pred = LabelVector::from_strs(&["a", "a", "b", "a"]);
        let u: Vec<String> = ["a", "b", "ghost"].iter().map(|s| s.to_string()).collect();
        let m = ConfusionMatrix::from_labels(&truth, &pred, &u).unwrap();
        assert!((m.macro_recall().unwrap() - (1.0 + 0.5) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_precision_fixture() {
        // 0.5 * (5/7) + 0.5 * (3/3) = 6/7.
        assert!((fixture().weighted_precision().unwrap() - 6.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_precision_single_predicted_class() {
        let truth = LabelVector::from_strs(&["a", "a", "b", "b"]);
        let pred = LabelVector::from_strs(&["a", "a", "a", "a"]);
        let u = vec!["a".to_string(), "b".to_string()];
        let m = ConfusionMatrix::from_labels(&truth, &pred, &u).unwrap();
        assert!((m.weighted_precision().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn balanced_accuracy_equals_macro_recall() {
        let m = fixture();
        assert_eq!(m.balanced_accuracy().unwrap(), m.macro_recall().unwrap());
    }

    #[test]
    fn mcc_perfect_and_degenerate() {
        let ident = ConfusionMatrix::from_counts(
            vec![vec![3, 0], vec![0, 4]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!((ident.mcc().unwrap() - 1.0).abs() < 1e-15);

        let one_class = ConfusionMatrix::from_counts(
            vec![vec![3, 4], vec![0, 0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert_eq!(one_class.mcc().unwrap(), 0.0);
    }

    #[test]
    fn mcc_hand_computed_third() {
        let m = ConfusionMatrix::from_counts(
            vec![vec![2, 1], vec![1, 2]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!((m.mcc().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let m = ConfusionMatrix::from_counts(
            vec![vec![0, 0], vec![0, 0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!(m.accuracy().is_err());
        assert!(m.macro_recall().is_err());
        assert!(m.mcc().is_err());
    }

    #[test]
    fn metrics_invariant_under_relabeling() {
        use rand::Rng;
        let mut rng = crate::RandomSource::new(40).rng();
        for _ in 0..50 {
            let k = rng.random_range(2..6usize);
            let counts: Vec<Vec<u64>> = (0..k)
                .map(|_| (0..k).map(|_| rng.random_range(0..20u64)).collect())
                .collect();
            if counts.iter().flatten().sum::<u64>() == 0 {
                continue;
            }
            let labels: Vec<String> = (0..k).map(|i| format!("c{}", i)).collect();
            let m = ConfusionMatrix::from_counts(counts.clone(), labels.clone()).unwrap();

            // Reverse-permute rows, columns and universe together.
            let perm: Vec<usize> = (0..k).rev().collect();
            let permuted: Vec<Vec<u64>> = perm
                .iter()
                .map(|&i| perm.iter().map(|&j| counts[i][j]).collect())
                .collect();
            let plabels: Vec<String> = perm.iter().map(|&i| labels[i].clone()).collect();
            let mp = ConfusionMatrix::from_counts(permuted, plabels).unwrap();

            assert!((m.accuracy().unwrap() - mp.accuracy().unwrap()).abs() < 1e-12);
            if let (Ok(a), Ok(b)) = (m.macro_recall(), mp.macro_recall()) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(
                (m.weighted_precision().unwrap() - mp.weighted_precision().unwrap()).abs()
                    < 1e-12
            );
            assert!((m.mcc().unwrap() - mp.mcc().unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_ranges_hold_on_random_matrices() {
        use rand::Rng;
        let mut rng = crate::RandomSource::new(41).rng();
        for _ in 0..200 {
            let k = rng.random_range(2..5usize);
            let counts: Vec<Vec<u64>> = (0..k)
                .map(|_| (0..k).map(|_| rng.random_range(0..10u64)).collect())
                .collect();
            if counts.iter().flatten().sum::<u64>() == 0 {
                continue;
            }
            let labels: Vec<String> = (0..k).map(|i| format!("c{}", i)).collect();
            let m = ConfusionMatrix::from_counts(counts, labels).unwrap();
            let acc = m.accuracy().unwrap();
            assert!((0.0..=1.0).contains(&acc));
            if let Ok(r) = m.macro_recall() {
                assert!((0.0..=1.0).contains(&r));
            }
            let p = m.weighted_precision().unwrap();
            assert!((0.0..=1.0).contains(&p));
            let mcc = m.mcc().unwrap();
            assert!((-1.0..=1.0).contains(&mcc), "mcc {} out of range", mcc);
        }
    }

    #[test]
    fn chance_level_predictor_scores_near_half() {
        use rand::Rng;
        let mut rng = crate::RandomSource::new(42).rng();
        let n = 10_000;
        let truth: Vec<&str> =
            (0..n).map(|_| if rng.random_range(0..2) == 0 { "a" } else { "b" }).collect();
        let pred: Vec<&str> =
            (0..n).map(|_| if rng.random_range(0..2) == 0 { "a" } else { "b" }).collect();
        let m = ConfusionMatrix::from_labels(
            &LabelVector::from_strs(&truth),
            &LabelVector::from_strs(&pred),
            &["a".to_string(), "b".to_string()],
        )
        .unwrap();
        let ba = m.balanced_accuracy().unwrap();
        assert!((ba - 0.5).abs() < 0.02, "chance-level BA was {}", ba);
    }
}
