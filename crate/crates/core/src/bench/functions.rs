use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Standard benchmark landscapes with known minima.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    Sphere,
    Rastrigin,
    Rosenbrock,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [Self::Sphere, Self::Rastrigin, Self::Rosenbrock];

    pub fn evaluate(self, x: &[f64]) -> f64 {
        match self {
            Self::Sphere => x.iter().map(|v| v * v).sum(),
            Self::Rastrigin => {
                10.0 * x.len() as f64
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            Self::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
        }
    }

    /// Location and value of the global minimum in `dim` dimensions.
    pub fn optimum(self, dim: usize) -> (Vec<f64>, f64) {
        match self {
            Self::Sphere | Self::Rastrigin => (vec![0.0; dim], 0.0),
            Self::Rosenbrock => (vec![1.0; dim], 0.0),
        }
    }

    /// Conventional search box.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Self::Sphere => (-5.0, 5.0),
            Self::Rastrigin => (-5.12, 5.12),
            Self::Rosenbrock => (-2.048, 2.048),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Rastrigin => "rastrigin",
            Self::Rosenbrock => "rosenbrock",
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown test function {s:?}")))
    }
}

/// Looks up a benchmark by name.
pub fn test_functions(name: &str) -> Result<TestFunction, Error> {
    name.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optima_are_zero() {
        for f in TestFunction::ALL {
            for dim in [1, 2, 7] {
                let (x, v) = f.optimum(dim);
                assert_eq!(f.evaluate(&x), v);
                assert_eq!(v, 0.0);
            }
        }
        assert!(TestFunction::Rastrigin.evaluate(&[0.5, 0.0]) > 0.0);
        assert!(TestFunction::Rosenbrock.evaluate(&[0.0, 0.0]) == 1.0);
    }

    #[test]
    fn lookup() {
        assert_eq!(test_functions("Sphere").unwrap(), TestFunction::Sphere);
        assert!(test_functions("ackley").is_err());
    }
}
