//! McNemar's paired test with continuity correction, and the chi-square
//! tail it needs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// Samples classifier A gets right and B gets wrong.
    pub b: u64,
    /// Samples classifier A gets wrong and B gets right.
    pub c: u64,
    pub statistic: f64,
    pub p_value: f64,
}

pub fn mcnemar(pred_a: &[usize], pred_b: &[usize], y_true: &[usize]) -> Result<McNemarResult> {
    if pred_a.len() != y_true.len() {
        return Err(Error::LengthMismatch(pred_a.len(), y_true.len()));
    }
    if pred_b.len() != y_true.len() {
        return Err(Error::LengthMismatch(pred_b.len(), y_true.len()));
    }
    if y_true.is_empty() {
        return Err(Error::Empty);
    }
    let (mut b, mut c) = (0u64, 0u64);
    for ((&a, &p), &t) in pred_a.iter().zip(pred_b).zip(y_true) {
        match (a == t, p == t) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(mcnemar_from_counts(b, c))
}

/// `(|b - c| - 1)² / (b + c)`, upper chi-square(1) tail.
pub fn mcnemar_from_counts(b: u64, c: u64) -> McNemarResult {
    if b + c == 0 {
        return McNemarResult {
            b,
            c,
            statistic: 0.0,
            p_value: 1.0,
        };
    }
    let diff = b.abs_diff(c) as f64 - 1.0;
    let statistic = diff * diff / (b + c) as f64;
    McNemarResult {
        b,
        c,
        statistic,
        p_value: chi_square_sf(statistic, 1.0),
    }
}

/// Upper tail `P(X > x)` of a chi-square with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0)
}

/// Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized upper incomplete gamma `Q(a, x)`: power series for the lower
/// function when `x < a + 1`, Lentz continued fraction otherwise.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..GAMMA_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * GAMMA_EPS {
                break;
            }
        }
        1.0 - sum * log_prefactor.exp()
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_EPS {
                break;
            }
        }
        log_prefactor.exp() * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn discordant_two_and_ten() {
        let r = mcnemar_from_counts(2, 10);
        assert!((r.statistic - 49.0 / 12.0).abs() < 1e-12);
        assert!((r.p_value - 0.0433).abs() < 1e-3);
        assert!(r.p_value < 0.05);
    }

    #[test]
    fn identical_predictions() {
        let y = [0, 1, 2, 1];
        let p = [0, 2, 2, 1];
        let r = mcnemar(&p, &p, &y).unwrap();
        assert_eq!((r.b, r.c, r.statistic, r.p_value), (0, 0, 0.0, 1.0));
    }

    #[test]
    fn swap_symmetry() {
        let y = [0, 1, 1, 0, 1, 0, 0];
        let a = [0, 1, 0, 0, 1, 1, 0];
        let b = [1, 1, 1, 0, 0, 0, 1];
        let ab = mcnemar(&a, &b, &y).unwrap();
        let ba = mcnemar(&b, &a, &y).unwrap();
        assert_eq!((ab.b, ab.c), (ba.c, ba.b));
        assert_eq!(ab.statistic, ba.statistic);
        assert_eq!(ab.p_value, ba.p_value);
        assert!(mcnemar(&a[..3], &b, &y).is_err());
    }

    #[test]
    fn chi_square_critical_value() {
        assert!((chi_square_sf(3.841, 1.0) - 0.05).abs() < 1e-4);
    }

    #[test]
    fn matches_independent_chi_square() {
        for dof in [1.0, 2.0, 3.0, 7.5] {
            let dist = ChiSquared::new(dof).unwrap();
            for i in 1..200 {
                let x = i as f64 * 0.173;
                let want = dist.sf(x);
                let got = chi_square_sf(x, dof);
                assert!(((got - want) / want).abs() < 1e-9, "dof {dof} x {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn one_dof_tail_is_erfc() {
        // P(chi2_1 > x) = erfc(sqrt(x/2))
        for i in 1..100 {
            let x = i as f64 * 0.31;
            let want = statrs::function::erf::erfc((x / 2.0).sqrt());
            assert!(((chi_square_sf(x, 1.0) - want) / want).abs() < 1e-10);
        }
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
    }
}
