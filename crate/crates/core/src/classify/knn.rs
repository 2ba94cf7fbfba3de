use ndarray::{Array2, ArrayView2};

use crate::dataset::LabeledFeatureSet;
use crate::error::{Error, Result};

/// Euclidean k-nearest-neighbour majority vote. Distance ties go to the
/// lower training index, vote ties to the lower class index.
#[derive(Debug, Clone)]
pub struct KnnModel {
    x: Array2<f64>,
    y: Vec<usize>,
    k: usize,
    n_classes: usize,
}

pub fn train_knn(train: &LabeledFeatureSet, k: usize) -> Result<KnnModel> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Config(format!("k must be odd and positive, got {k}")));
    }
    Ok(KnnModel {
        x: train.features().as_standard_layout().into_owned(),
        y: train.labels().to_vec(),
        k,
        n_classes: train.n_classes(),
    })
}

impl KnnModel {
    /// Labels and per-class vote fractions.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        if x.ncols() != self.x.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.x.ncols(),
                found: x.ncols(),
            });
        }
        let k = self.k.min(self.y.len());
        let mut labels = Vec::with_capacity(x.nrows());
        let mut scores = Array2::zeros((x.nrows(), self.n_classes));
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.y.len());
        for (r, q) in x.outer_iter().enumerate() {
            dist.clear();
            for (i, row) in self.x.outer_iter().enumerate() {
                let d: f64 = row.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                dist.push((d, i));
            }
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < dist.len() {
                dist.select_nth_unstable_by(k - 1, cmp);
            }
            let mut votes = vec![0usize; self.n_classes];
            for &(_, i) in &dist[..k] {
                votes[self.y[i]] += 1;
            }
            let mut best = 0;
            for c in 1..self.n_classes {
                if votes[c] > votes[best] {
                    best = c;
                }
            }
            for (c, v) in votes.iter().enumerate() {
                scores[[r, c]] = *v as f64 / k as f64;
            }
            labels.push(best);
        }
        Ok((labels, scores))
    }
}
