//! Confusion-matrix metrics.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Confusion {
    pub classes: Vec<u32>,
    /// `matrix[t][p]`: rows with true class `classes[t]` predicted as `classes[p]`.
    pub matrix: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Confusion {
    /// Classes are the union of true and predicted labels, ascending.
    pub fn new(truth: &[u32], predicted: &[u32]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Dimension { expected: truth.len(), got: predicted.len() });
        }
        if truth.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut classes: Vec<u32> = truth.iter().chain(predicted).copied().collect();
        classes.sort_unstable();
        classes.dedup();
        let idx = |c: u32| classes.binary_search(&c).expect("class collected above");
        let mut matrix = vec![vec![0; classes.len()]; classes.len()];
        for (&t, &p) in truth.iter().zip(predicted) {
            matrix[idx(t)][idx(p)] += 1;
        }
        Ok(Confusion { classes, matrix })
    }

    pub fn total(&self) -> usize {
        self.matrix.iter().flatten().sum()
    }

    /// Precision, recall and F1 of one class; a zero denominator gives 0.
    pub fn class_scores(&self, c: usize) -> (f64, f64, f64) {
        let tp = self.matrix[c][c] as f64;
        let predicted: usize = self.matrix.iter().map(|row| row[c]).sum();
        let actual: usize = self.matrix[c].iter().sum();
        let ratio = |num: f64, den: usize| if den == 0 { 0.0 } else { num / den as f64 };
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        (p, r, f)
    }

    /// Accuracy plus macro-averaged precision, recall and F1.
    pub fn scores(&self) -> Scores {
        let k = self.classes.len() as f64;
        let hits: usize = (0..self.classes.len()).map(|i| self.matrix[i][i]).sum();
        let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
        for c in 0..self.classes.len() {
            let (cp, cr, cf) = self.class_scores(c);
            p += cp;
            r += cr;
            f += cf;
        }
        Scores { accuracy: hits as f64 / self.total() as f64, precision: p / k, recall: r / k, f1: f / k }
    }
}

pub fn scores(truth: &[u32], predicted: &[u32]) -> Result<Scores> {
    Ok(Confusion::new(truth, predicted)?.scores())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_binary_case() {
        // tp=3 fn=1 fp=2 tn=4 for class 1
        let truth = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let pred = [1, 1, 1, 0, 1, 1, 0, 0, 0, 0];
        let c = Confusion::new(&truth, &pred).unwrap();
        assert_eq!(c.matrix, vec![vec![4, 2], vec![1, 3]]);
        let s = c.scores();
        assert!((s.accuracy - 0.7).abs() < 1e-12);
        let (p1, r1) = (3.0 / 5.0, 3.0 / 4.0);
        let (p0, r0) = (4.0 / 5.0, 4.0 / 6.0);
        let f = |p: f64, r: f64| 2.0 * p * r / (p + r);
        assert!((s.precision - (p0 + p1) / 2.0).abs() < 1e-12);
        assert!((s.recall - (r0 + r1) / 2.0).abs() < 1e-12);
        assert!((s.f1 - (f(p0, r0) + f(p1, r1)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn never_predicted_class_scores_zero() {
        let s = scores(&[0, 1, 2], &[0, 0, 0]).unwrap();
        assert!((s.accuracy - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(scores(&[], &[]).is_err());
        assert!(scores(&[0], &[0, 1]).is_err());
    }
}
