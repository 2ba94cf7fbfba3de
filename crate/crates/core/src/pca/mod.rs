//! Standardization, covariance eigendecomposition and cumulative explained
//! variance (CEV) component selection.
//!
//! When a matrix has more columns than rows the `d x d` covariance is never
//! formed; the `n x n` Gram matrix `X Xᵀ / n` shares its nonzero spectrum and
//! its eigenvectors map back through `Xᵀ`.

pub mod jacobi;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues closer than this are ordered by their original index.
const EIGENVALUE_TIE: f64 = 1e-10;
/// Slack on the CEV comparison so that a threshold of 1.0 is reachable in
/// floating point.
const CEV_SLACK: f64 = 1e-12;
/// Eigenvalues below this fraction of the total variance count as zero.
const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl StandardizationParams {
    pub fn n_dims(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_dims() {
            return Err(Error::DimensionMismatch {
                expected: self.n_dims(),
                found: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (mut col, (&mu, &s)) in out
            .axis_iter_mut(Axis(1))
            .zip(self.means.iter().zip(&self.scales))
        {
            col.mapv_inplace(|v| (v - mu) / s);
        }
        Ok(out)
    }
}

/// Centers every column and divides by its population standard deviation.
/// Constant columns keep scale 1 and come out as exact zeros.
pub fn standardize(x: ArrayView2<f64>) -> Result<(Array2<f64>, StandardizationParams)> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InvalidData(format!(
            "standardization needs at least 2 rows, got {n}"
        )));
    }
    let mut means = Vec::with_capacity(x.ncols());
    let mut scales = Vec::with_capacity(x.ncols());
    let mut out = Array2::zeros(x.raw_dim());
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            means.push(first);
            scales.push(1.0);
            continue;
        }
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        let scale = if sd > 0.0 { sd } else { 1.0 };
        for (o, v) in out.column_mut(j).iter_mut().zip(col) {
            *o = (v - mean) / scale;
        }
        means.push(mean);
        scales.push(scale);
    }
    Ok((out, StandardizationParams { means, scales }))
}

/// Which symmetric matrix to decompose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenPath {
    /// Covariance when `n_dims <= n_samples`, Gram otherwise.
    #[default]
    Auto,
    Covariance,
    Gram,
}

/// Sorted eigen-structure of the sample covariance `XᵀX / n`.
#[derive(Debug, Clone)]
pub struct CovarianceSpectrum {
    /// All eigenvalues that the chosen path exposes, descending, clamped at 0.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors in feature space for the leading eigenvalues; may be
    /// shorter than `eigenvalues` on the Gram path (null directions omitted).
    pub vectors: Vec<Vec<f64>>,
    pub total_variance: f64,
    pub sweeps: usize,
}

impl CovarianceSpectrum {
    /// Running `sum(eigenvalues[..=i]) / total_variance`.
    pub fn cumulative_explained_variance(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.eigenvalues
            .iter()
            .map(|l| {
                acc += l;
                if self.total_variance > 0.0 {
                    acc / self.total_variance
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Smallest component count whose CEV reaches `threshold`, limited to the
    /// numerical rank.
    pub fn components_for(&self, threshold: f64) -> usize {
        let rank = self
            .eigenvalues
            .iter()
            .take_while(|&&l| l > RANK_TOLERANCE * self.total_variance)
            .count()
            .min(self.vectors.len())
            .max(1);
        let cev = self.cumulative_explained_variance();
        cev.iter()
            .position(|&c| c >= threshold - CEV_SLACK)
            .map_or(rank, |i| i + 1)
            .min(rank)
    }
}

fn ordered(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    // near-equal runs fall back to index order
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[start]] - values[idx[end]] <= EIGENVALUE_TIE {
            end += 1;
        }
        idx[start..end].sort_unstable();
        start = end;
    }
    idx
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn to_row_major(m: &Array2<f64>) -> Vec<f64> {
    m.iter().copied().collect()
}

/// Eigendecomposition of the covariance of already standardized data.
pub fn covariance_spectrum(x_std: ArrayView2<f64>, path: EigenPath) -> Result<CovarianceSpectrum> {
    let (n, d) = x_std.dim();
    if n == 0 || d == 0 {
        return Err(Error::Empty);
    }
    let inv_n = 1.0 / n as f64;
    let total_variance = x_std.iter().map(|v| v * v).sum::<f64>() * inv_n;
    let use_gram = match path {
        EigenPath::Auto => d > n,
        EigenPath::Covariance => false,
        EigenPath::Gram => true,
    };
    if !use_gram {
        let cov = x_std.t().dot(&x_std) * inv_n;
        let eig = jacobi::symmetric_eigen(to_row_major(&cov), d)?;
        let order = ordered(&eig.values);
        let eigenvalues = order.iter().map(|&i| eig.values[i].max(0.0)).collect();
        let vectors = order
            .iter()
            .map(|&i| {
                let mut v = eig.vectors[i].clone();
                fix_sign(&mut v);
                v
            })
            .collect();
        return Ok(CovarianceSpectrum {
            eigenvalues,
            vectors,
            total_variance,
            sweeps: eig.sweeps,
        });
    }
    let gram = x_std.dot(&x_std.t()) * inv_n;
    let eig = jacobi::symmetric_eigen(to_row_major(&gram), n)?;
    let order = ordered(&eig.values);
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.values[i].max(0.0)).collect();
    let mut vectors = Vec::new();
    for (&i, &lambda) in order.iter().zip(&eigenvalues) {
        if lambda <= RANK_TOLERANCE * total_variance {
            break;
        }
        let u = Array1::from(eig.vectors[i].clone());
        let mut w = x_std.t().dot(&u);
        let norm = w.dot(&w).sqrt();
        w.mapv_inplace(|v| v / norm);
        let mut w = w.to_vec();
        fix_sign(&mut w);
        vectors.push(w);
    }
    Ok(CovarianceSpectrum {
        eigenvalues,
        vectors,
        total_variance,
        sweeps: eig.sweeps,
    })
}

/// Fitted projection onto the leading principal components.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub standardization: StandardizationParams,
    /// `n_dims x m`, orthonormal columns.
    pub projection: Array2<f64>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub total_variance: f64,
    pub threshold: f64,
}

impl PcaModel {
    /// Standardizes `x` and fits on it.
    pub fn fit(x: ArrayView2<f64>, threshold: f64) -> Result<Self> {
        let (x_std, params) = standardize(x)?;
        fit_pca(x_std.view(), params, threshold)
    }

    pub fn n_components(&self) -> usize {
        self.projection.ncols()
    }

    pub fn n_dims(&self) -> usize {
        self.projection.nrows()
    }

    pub fn explained_variance_ratio(&self) -> f64 {
        if self.total_variance > 0.0 {
            self.eigenvalues.iter().sum::<f64>() / self.total_variance
        } else {
            1.0
        }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let x_std = self.standardization.apply(x)?;
        Ok(x_std.dot(&self.projection))
    }

    /// Maps scores back into standardized feature space.
    pub fn reconstruct_standardized(&self, scores: ArrayView2<f64>) -> Result<Array2<f64>> {
        if scores.ncols() != self.n_components() {
            return Err(Error::DimensionMismatch {
                expected: self.n_components(),
                found: scores.ncols(),
            });
        }
        Ok(scores.dot(&self.projection.t()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&PcaModelFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: PcaModelFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

fn validate_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "CEV threshold must lie in (0, 1], got {threshold}"
        )))
    }
}

pub fn fit_pca(
    x_std: ArrayView2<f64>,
    standardization: StandardizationParams,
    threshold: f64,
) -> Result<PcaModel> {
    fit_pca_with(x_std, standardization, threshold, EigenPath::Auto)
}

pub fn fit_pca_with(
    x_std: ArrayView2<f64>,
    standardization: StandardizationParams,
    threshold: f64,
    path: EigenPath,
) -> Result<PcaModel> {
    validate_threshold(threshold)?;
    if standardization.n_dims() != x_std.ncols() {
        return Err(Error::DimensionMismatch {
            expected: standardization.n_dims(),
            found: x_std.ncols(),
        });
    }
    let spectrum = covariance_spectrum(x_std, path)?;
    if spectrum.total_variance <= 0.0 {
        return Err(Error::InvalidData("data has zero total variance".into()));
    }
    let m = spectrum.components_for(threshold);
    let d = x_std.ncols();
    let mut projection = Array2::zeros((d, m));
    for (k, v) in spectrum.vectors.iter().take(m).enumerate() {
        projection.column_mut(k).assign(&Array1::from(v.clone()));
    }
    Ok(PcaModel {
        standardization,
        projection,
        eigenvalues: spectrum.eigenvalues[..m].to_vec(),
        total_variance: spectrum.total_variance,
        threshold,
    })
}

/// On-disk layout of a [`PcaModel`]; `projection` is row-major `n_dims x m`.
#[derive(Debug, Serialize, Deserialize)]
struct PcaModelFile {
    means: Vec<f64>,
    scales: Vec<f64>,
    eigenvalues: Vec<f64>,
    projection: Vec<f64>,
    m: usize,
    threshold: f64,
    total_variance: f64,
}

impl From<&PcaModel> for PcaModelFile {
    fn from(model: &PcaModel) -> Self {
        Self {
            means: model.standardization.means.clone(),
            scales: model.standardization.scales.clone(),
            eigenvalues: model.eigenvalues.clone(),
            projection: to_row_major(&model.projection),
            m: model.n_components(),
            threshold: model.threshold,
            total_variance: model.total_variance,
        }
    }
}

impl TryFrom<PcaModelFile> for PcaModel {
    type Error = Error;

    fn try_from(f: PcaModelFile) -> Result<Self> {
        let d = f.means.len();
        if f.scales.len() != d {
            return Err(Error::LengthMismatch(d, f.scales.len()));
        }
        if f.scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidData("scales must be strictly positive".into()));
        }
        if f.eigenvalues.len() != f.m {
            return Err(Error::LengthMismatch(f.m, f.eigenvalues.len()));
        }
        validate_threshold(f.threshold)?;
        let projection = Array2::from_shape_vec((d, f.m), f.projection)
            .map_err(|e| Error::InvalidData(format!("projection shape: {e}")))?;
        Ok(PcaModel {
            standardization: StandardizationParams {
                means: f.means,
                scales: f.scales,
            },
            projection,
            eigenvalues: f.eigenvalues,
            total_variance: f.total_variance,
            threshold: f.threshold,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn standardize_hand_example() {
        let x = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let (z, p) = standardize(x.view()).unwrap();
        assert_eq!(p.means, vec![3.0, 4.0]);
        let sd = (8.0f64 / 3.0).sqrt();
        assert!((p.scales[0] - 1.63299).abs() < 1e-5);
        assert!((p.scales[1] - sd).abs() < 1e-15);
        let want = [-1.22474, 0.0, 1.22474];
        for (a, b) in z.column(0).iter().zip(want) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn standardize_constant_and_symmetric_columns() {
        let x = array![[1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [1.0, 1.0]];
        let (z, p) = standardize(x.view()).unwrap();
        assert_eq!(p.scales, vec![1.0, 1.0]);
        assert_eq!(p.means, vec![1.0, 0.0]);
        assert!(z.column(0).iter().all(|&v| v == 0.0));
        assert_eq!(z.column(1).to_vec(), vec![-1.0, 1.0, -1.0, 1.0]);
        assert!(standardize(array![[1.0, 2.0]].view()).is_err());
    }

    #[test]
    fn line_data_is_rank_one() {
        let x = Array2::from_shape_fn((6, 2), |(i, j)| (i as f64) * (j as f64 + 1.0));
        let model = PcaModel::fit(x.view(), 0.99).unwrap();
        assert_eq!(model.n_components(), 1);
        assert!((model.explained_variance_ratio() - 1.0).abs() < 1e-12);
        // exact reconstruction inside the retained subspace
        let (z, _) = standardize(x.view()).unwrap();
        let scores = model.transform(x.view()).unwrap();
        let back = model.reconstruct_standardized(scores.view()).unwrap();
        for (a, b) in z.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn correlated_pair_needs_both_components() {
        // standardized ±1 columns whose population correlation is 0.8
        let mut rows = Vec::new();
        for _ in 0..9 {
            rows.extend_from_slice(&[1.0, 1.0, -1.0, -1.0]);
        }
        rows.extend_from_slice(&[1.0, -1.0, -1.0, 1.0]);
        let x = Array2::from_shape_vec((20, 2), rows).unwrap();
        let (z, p) = standardize(x.view()).unwrap();
        let cov = z.t().dot(&z) / 20.0;
        assert!((cov[[0, 1]] - 0.8).abs() < 1e-12);
        let model = fit_pca(z.view(), p.clone(), 0.99).unwrap();
        assert_eq!(model.n_components(), 2);
        assert!((model.eigenvalues[0] - 1.8).abs() < 1e-12);
        assert!((model.eigenvalues[1] - 0.2).abs() < 1e-12);
        let model = fit_pca(z.view(), p, 0.9).unwrap();
        assert_eq!(model.n_components(), 1);
    }

    #[test]
    fn transform_of_means_is_zero() {
        let x = Array2::from_shape_fn((8, 3), |(i, j)| ((i * 7 + j * 3) % 5) as f64);
        let model = PcaModel::fit(x.view(), 0.95).unwrap();
        let means = Array1::from(model.standardization.means.clone());
        let rows = Array2::from_shape_fn((3, 3), |(_, j)| means[j]);
        let t = model.transform(rows.view()).unwrap();
        assert!(t.iter().all(|v| v.abs() < 1e-12));
        assert!(matches!(
            model.transform(Array2::zeros((1, 2)).view()),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn threshold_validation() {
        let x = array![[1.0, 2.0], [2.0, 1.0], [0.0, 0.0]];
        assert!(PcaModel::fit(x.view(), 0.0).is_err());
        assert!(PcaModel::fit(x.view(), 1.5).is_err());
        assert!(PcaModel::fit(x.view(), 1.0).is_ok());
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        fix_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }

    #[test]
    fn near_equal_eigenvalues_keep_index_order() {
        assert_eq!(ordered(&[1.0, 2.0, 2.0 + 1e-12, 0.5]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn json_round_trip() {
        let x = Array2::from_shape_fn((7, 4), |(i, j)| ((i * 5 + j * j) % 7) as f64 * 0.1);
        let model = PcaModel::fit(x.view(), 0.9).unwrap();
        let back = PcaModel::from_json(&model.to_json().unwrap()).unwrap();
        assert_eq!(back, model);
    }
}
