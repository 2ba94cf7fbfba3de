use std::io::Write;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Score at or above which samples are called positive; `+inf` for the
    /// origin.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocResult {
    /// One-vs-all curve per class.
    pub curves: Vec<RocCurve>,
}

/// Binary ROC of `scores` against `positive`. One vertex per distinct score,
/// visited in descending order; AUC by the trapezoid rule.
pub fn roc_binary(scores: &[f64], positive: &[bool]) -> Result<RocCurve> {
    if scores.len() != positive.len() {
        return Err(Error::LengthMismatch(scores.len(), positive.len()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidData(format!(
            "ROC needs both classes, got {n_pos} positive and {n_neg} negative"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let p = RocPoint {
            threshold: s,
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
        };
        let prev = points.last().expect("origin");
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
        points.push(p);
    }
    Ok(RocCurve { points, auc })
}

/// One-vs-all ROC for every column of `scores`.
pub fn roc_ova(scores: ArrayView2<f64>, y_true: &[usize]) -> Result<RocResult> {
    if scores.nrows() != y_true.len() {
        return Err(Error::LengthMismatch(scores.nrows(), y_true.len()));
    }
    let k = scores.ncols();
    let mut present = vec![false; k];
    for (row, &y) in y_true.iter().enumerate() {
        if y >= k {
            return Err(Error::LabelOutOfRange {
                row,
                label: y as u64,
                n_classes: k,
            });
        }
        present[y] = true;
    }
    if let Some(c) = present.iter().position(|p| !p) {
        return Err(Error::ClassAbsent(c));
    }
    let curves = (0..k)
        .map(|c| {
            let col: Vec<f64> = scores.column(c).to_vec();
            let pos: Vec<bool> = y_true.iter().map(|&y| y == c).collect();
            roc_binary(&col, &pos)
        })
        .collect::<Result<_>>()?;
    Ok(RocResult { curves })
}

impl RocResult {
    pub fn aucs(&self) -> Vec<f64> {
        self.curves.iter().map(|c| c.auc).collect()
    }

    /// `class,threshold,fpr,tpr` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "class,threshold,fpr,tpr")?;
        for (c, curve) in self.curves.iter().enumerate() {
            for p in &curve.points {
                writeln!(w, "{c},{},{},{}", p.threshold, p.fpr, p.tpr)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn perfect_and_constant() {
        let r = roc_binary(&[0.9, 0.8, 0.1, 0.0], &[true, true, false, false]).unwrap();
        assert_eq!(r.auc, 1.0);
        let r = roc_binary(&[0.5; 4], &[true, false, true, false]).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.points.len(), 2);
    }

    #[test]
    fn three_of_four_pairs() {
        let r = roc_binary(&[0.9, 0.3, 0.8, 0.2], &[true, true, false, false]).unwrap();
        assert_eq!(r.auc, 0.75);
        let last = r.points.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn ova_requires_every_class() {
        let s = array![[0.9, 0.1, 0.0], [0.2, 0.8, 0.0]];
        assert!(matches!(roc_ova(s.view(), &[0, 1]), Err(Error::ClassAbsent(2))));
        let r = roc_ova(s.slice(ndarray::s![.., ..2]), &[0, 1]).unwrap();
        assert_eq!(r.aucs(), vec![1.0, 1.0]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("class,threshold,fpr,tpr\n0,inf,0,0\n"));
    }
}
