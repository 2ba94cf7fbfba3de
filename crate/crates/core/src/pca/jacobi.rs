//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};

/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// Frobenius norm of the input.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-11;
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix, unsorted.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * sum).sqrt()
}

/// Diagonalises the row-major `n x n` symmetric matrix `a` by sweeps of plane
/// rotations over every `(p, q)` pair until the off-diagonal mass vanishes.
///
/// Only the upper triangle is trusted; the lower triangle is overwritten.
pub fn symmetric_eigen(mut a: Vec<f64>, n: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), n * n, "matrix storage does not match order");
    for i in 0..n {
        for j in (i + 1)..n {
            a[j * n + i] = a[i * n + j];
        }
    }
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    // rows of `vt` are the accumulated eigenvectors
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let target = OFF_DIAGONAL_TOLERANCE * scale;
    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a, n);
    while off > target && off > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // negligible relative to both diagonal entries
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs().min(aqq.abs())) {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_rows(&mut a, n, p, q, c, s);
                for k in 0..n {
                    a[k * n + p] = a[p * n + k];
                    a[k * n + q] = a[q * n + k];
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                rotate_rows(&mut vt, n, p, q, c, s);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a, n);
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = vt.chunks_exact(n.max(1)).take(n).map(<[f64]>::to_vec).collect();
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// `row_p <- c*row_p - s*row_q`, `row_q <- s*row_p + c*row_q`.
fn rotate_rows(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = m.split_at_mut(q * n);
    let rp = &mut head[p * n..(p + 1) * n];
    let rq = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += lambda * v[i] * v[j];
                }
            }
        }
        out
    }

    #[test]
    fn two_by_two_correlation() {
        let e = symmetric_eigen(vec![1.0, 0.8, 0.8, 1.0], 2).unwrap();
        let mut vals = e.values.clone();
        vals.sort_by(|a, b| b.total_cmp(a));
        assert!((vals[0] - 1.8).abs() < 1e-14);
        assert!((vals[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_needs_no_sweep() {
        let e = symmetric_eigen(vec![3.0, 0.0, 0.0, 2.0], 2).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, vec![3.0, 2.0]);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 12;
        let mut a = vec![0.0; n * n];
        let mut x = 0.37_f64;
        for i in 0..n {
            for j in i..n {
                x = (x * 3.7 + 0.11).fract();
                a[i * n + j] = x - 0.5;
                a[j * n + i] = x - 0.5;
            }
        }
        let e = symmetric_eigen(a.clone(), n).unwrap();
        let r = reconstruct(&e, n);
        for (u, v) in a.iter().zip(&r) {
            assert!((u - v).abs() < 1e-10);
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = e.vectors[i].iter().zip(&e.vectors[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_matrix() {
        let e = symmetric_eigen(Vec::new(), 0).unwrap();
        assert!(e.values.is_empty());
    }
}
