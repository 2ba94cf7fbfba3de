//! RBF-kernel support vector classifier, one-vs-one over class pairs, each
//! binary dual solved by SMO with maximal-violating-pair working sets.

use std::collections::{HashMap, VecDeque};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledFeatureSet;
use crate::error::{Error, Result};

pub const KKT_TOLERANCE: f64 = 1e-3;
pub const MAX_SMO_ITERATIONS: usize = 100_000;
/// Kernel-row cache budget per binary problem, in f64 entries.
const CACHE_ENTRIES: usize = 1 << 23;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    /// `1 / (n_dims * mean column variance)`.
    #[default]
    Scale,
    Fixed(f64),
}

impl Gamma {
    pub fn resolve(self, x: ArrayView2<f64>) -> f64 {
        match self {
            Gamma::Fixed(g) => g,
            Gamma::Scale => {
                let (n, d) = x.dim();
                if n == 0 || d == 0 {
                    return 1.0;
                }
                let mean_var = x
                    .columns()
                    .into_iter()
                    .map(|c| {
                        let m = c.sum() / n as f64;
                        c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64
                    })
                    .sum::<f64>()
                    / d as f64;
                if mean_var > 0.0 {
                    1.0 / (d as f64 * mean_var)
                } else {
                    1.0
                }
            }
        }
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Decision function `sum(coef_s * K(sv_s, x)) + bias` separating
/// `positive` (> 0) from `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_s * y_s` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64], gamma: f64) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * rbf(sv, x, gamma))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub n_classes: usize,
    pub dim: usize,
    pub gamma: f64,
    pub c: f64,
    pub pairs: Vec<BinarySvm>,
}

struct KernelRows<'a> {
    rows: Vec<&'a [f64]>,
    gamma: f64,
    cache: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(rows: Vec<&'a [f64]>, gamma: f64) -> Self {
        let capacity = (CACHE_ENTRIES / rows.len().max(1)).max(2);
        Self {
            rows,
            gamma,
            cache: HashMap::new(),
            order: VecDeque::new(),
            capacity,
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if !self.cache.contains_key(&i) {
            if self.cache.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.cache.remove(&old);
                }
            }
            let xi = self.rows[i];
            let row = self.rows.iter().map(|xj| rbf(xi, xj, self.gamma)).collect();
            self.cache.insert(i, row);
            self.order.push_back(i);
        }
        &self.cache[&i]
    }
}

struct DualSolution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
}

/// Solves `min ½ αᵀQα - eᵀα` s.t. `0 <= α <= C`, `yᵀα = 0`, with
/// `Q_ij = y_i y_j K(x_i, x_j)`.
fn solve_dual(rows: Vec<&[f64]>, y: &[f64], c: f64, gamma: f64) -> Option<DualSolution> {
    let n = y.len();
    let mut kernel = KernelRows::new(rows, gamma);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);
    let mut iterations = 0;
    loop {
        let mut i = usize::MAX;
        let mut g_max = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut g_min = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > g_max {
                g_max = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < g_min {
                g_min = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < KKT_TOLERANCE {
            break;
        }
        if iterations == MAX_SMO_ITERATIONS {
            return None;
        }
        iterations += 1;

        let k_ij = kernel.row(i)[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (2.0 + 2.0 * k_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * k_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let d_i = (alpha[i] - old_i) * y[i];
        let d_j = (alpha[j] - old_j) * y[j];
        let row_i = kernel.row(i).to_vec();
        let row_j = kernel.row(j);
        for t in 0..n {
            grad[t] += y[t] * (row_i[t] * d_i + row_j[t] * d_j);
        }
    }

    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Some(DualSolution {
        alpha,
        rho,
        iterations,
    })
}

fn train_pair(
    x: ArrayView2<f64>,
    labels: &[usize],
    positive: usize,
    negative: usize,
    c: f64,
    gamma: f64,
) -> Result<BinarySvm> {
    let idx: Vec<usize> = (0..labels.len())
        .filter(|&i| labels[i] == positive || labels[i] == negative)
        .collect();
    let rows: Vec<&[f64]> = idx
        .iter()
        .map(|&i| x.row(i).to_slice().expect("standard layout"))
        .collect();
    let y: Vec<f64> = idx
        .iter()
        .map(|&i| if labels[i] == positive { 1.0 } else { -1.0 })
        .collect();
    let sol = solve_dual(rows.clone(), &y, c, gamma)
        .ok_or(Error::SmoNotConverged(positive, negative))?;
    let mut support_vectors = Vec::new();
    let mut coef = Vec::new();
    for (t, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(rows[t].to_vec());
            coef.push(a * y[t]);
        }
    }
    Ok(BinarySvm {
        positive,
        negative,
        support_vectors,
        coef,
        bias: -sol.rho,
        iterations: sol.iterations,
    })
}

/// Trains one binary machine per pair of classes present in `train`.
pub fn train_svm(train: &LabeledFeatureSet, c: f64, gamma: Gamma) -> Result<SvmModel> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("C must be positive, got {c}")));
    }
    let x = train.features().as_standard_layout();
    let gamma = gamma.resolve(x.view());
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    let present: Vec<usize> = train
        .class_counts()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(c, _)| c)
        .collect();
    if present.len() < 2 {
        return Err(Error::InvalidData(format!(
            "SVM needs at least 2 classes with samples, found {}",
            present.len()
        )));
    }
    let mut jobs = Vec::new();
    for (a, &p) in present.iter().enumerate() {
        for &q in &present[a + 1..] {
            jobs.push((p, q));
        }
    }
    let labels = train.labels();
    let run = |&(p, q): &(usize, usize)| train_pair(x.view(), labels, p, q, c, gamma);
    #[cfg(feature = "parallel")]
    let pairs: Result<Vec<_>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let pairs: Result<Vec<_>> = jobs.iter().map(run).collect();
    Ok(SvmModel {
        n_classes: train.n_classes(),
        dim: train.n_dims(),
        gamma,
        c,
        pairs: pairs?,
    })
}

impl SvmModel {
    /// Labels by one-vs-one vote and per-class summed signed decision values.
    /// Vote ties go to the larger summed decision value, then the lower class.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<(Vec<usize>, Array2<f64>)> {
        if x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.ncols(),
            });
        }
        let x = x.as_standard_layout();
        let mut scores = Array2::zeros((x.nrows(), self.n_classes));
        let mut labels = Vec::with_capacity(x.nrows());
        for (r, row) in x.outer_iter().enumerate() {
            let row = row.to_slice().expect("standard layout");
            let mut votes = vec![0usize; self.n_classes];
            for pair in &self.pairs {
                let d = pair.decision(row, self.gamma);
                scores[[r, pair.positive]] += d;
                scores[[r, pair.negative]] -= d;
                votes[if d > 0.0 { pair.positive } else { pair.negative }] += 1;
            }
            let mut best = 0;
            for k in 1..self.n_classes {
                let better = votes[k] > votes[best]
                    || (votes[k] == votes[best] && scores[[r, k]] > scores[[r, best]]);
                if better {
                    best = k;
                }
            }
            labels.push(best);
        }
        Ok((labels, scores))
    }
}
