use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidData("confusion matrix must be square".into()));
        }
        Ok(Self { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut counts = vec![vec![0u64; k]; k];
    for (row, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        if t >= k || p >= k {
            return Err(Error::LabelOutOfRange {
                row,
                label: t.max(p) as u64,
                n_classes: k,
            });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    /// False where the predicted-column total is zero (precision reported as 0).
    pub precision_defined: Vec<bool>,
    /// False where the true-row total is zero (recall reported as 0).
    pub recall_defined: Vec<bool>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
}

fn mean_where(values: &[f64], mask: impl Iterator<Item = bool>) -> f64 {
    let (sum, n) = values
        .iter()
        .zip(mask)
        .filter(|(_, m)| *m)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Accuracy is the trace over the total; precision divides the diagonal by
/// the predicted-column sum, recall by the true-row sum; F1 is their
/// harmonic mean. Macro averages skip undefined classes.
pub fn metrics(m: &ConfusionMatrix) -> Result<Metrics> {
    let total = m.total();
    if total == 0 {
        return Err(Error::Empty);
    }
    let k = m.n_classes();
    let diag: Vec<f64> = (0..k).map(|i| m.counts[i][i] as f64).collect();
    let accuracy = diag.iter().sum::<f64>() / total as f64;
    let mut precision = vec![0.0; k];
    let mut recall = vec![0.0; k];
    let mut f1 = vec![0.0; k];
    let mut precision_defined = vec![false; k];
    let mut recall_defined = vec![false; k];
    let mut support = vec![0.0; k];
    for i in 0..k {
        let col = m.col_sum(i);
        let row = m.row_sum(i);
        support[i] = row as f64;
        if col > 0 {
            precision[i] = diag[i] / col as f64;
            precision_defined[i] = true;
        }
        if row > 0 {
            recall[i] = diag[i] / row as f64;
            recall_defined[i] = true;
        }
        let (p, r) = (precision[i], recall[i]);
        if p + r > 0.0 {
            f1[i] = 2.0 * p * r / (p + r);
        }
    }
    let both: Vec<bool> = (0..k)
        .map(|i| precision_defined[i] && recall_defined[i])
        .collect();
    let weighted = |v: &[f64]| v.iter().zip(&support).map(|(a, w)| a * w).sum::<f64>() / total as f64;
    Ok(Metrics {
        accuracy,
        macro_precision: mean_where(&precision, precision_defined.iter().copied()),
        macro_recall: mean_where(&recall, recall_defined.iter().copied()),
        macro_f1: mean_where(&f1, both.iter().copied()),
        weighted_precision: weighted(&precision),
        weighted_recall: weighted(&recall),
        weighted_f1: weighted(&f1),
        precision,
        recall,
        f1,
        precision_defined,
        recall_defined,
    })
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> f64 {
    if y_true.is_empty() {
        return 0.0;
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    hits as f64 / y_true.len() as f64
}
