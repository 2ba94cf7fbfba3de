//! Uniform facade over population optimizers (GWO plus PSO and GA
//! baselines) and a harness that compares them as feature selectors.

mod compare;
mod functions;
mod ga;
mod pso;

pub use compare::{compare_selectors, AggregateRow, ComparisonRow, ComparisonTable, SelectionData};
pub use functions::{test_functions, TestFunction};
pub use ga::{ga, GaParams};
pub use pso::{pso, PsoParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gwo::{optimize, GwoConfig, OptimizeResult};
use crate::objective::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Gwo,
    Pso {
        #[serde(default = "default_inertia")]
        inertia: f64,
        #[serde(default = "default_acceleration")]
        cognitive: f64,
        #[serde(default = "default_acceleration")]
        social: f64,
    },
    Ga {
        #[serde(default = "default_crossover")]
        crossover_rate: f64,
        #[serde(default)]
        mutation_rate: Option<f64>,
        #[serde(default = "default_tournament")]
        tournament_size: usize,
    },
}

fn default_inertia() -> f64 {
    PsoParams::default().inertia
}
fn default_acceleration() -> f64 {
    PsoParams::default().cognitive
}
fn default_crossover() -> f64 {
    GaParams::default().crossover_rate
}
fn default_tournament() -> usize {
    GaParams::default().tournament_size
}

impl OptimizerKind {
    pub fn pso() -> Self {
        let p = PsoParams::default();
        OptimizerKind::Pso {
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
        }
    }

    pub fn ga() -> Self {
        let g = GaParams::default();
        OptimizerKind::Ga {
            crossover_rate: g.crossover_rate,
            mutation_rate: g.mutation_rate,
            tournament_size: g.tournament_size,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Gwo => "gwo",
            OptimizerKind::Pso { .. } => "pso",
            OptimizerKind::Ga { .. } => "ga",
        }
    }

    /// Default-parameter optimizer from `gwo`, `pso` or `ga`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "gwo" => Ok(OptimizerKind::Gwo),
            "pso" => Ok(Self::pso()),
            "ga" => Ok(Self::ga()),
            other => Err(Error::Config(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    #[serde(flatten)]
    pub kind: OptimizerKind,
    pub n_agents: usize,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(default)]
    pub parallel: bool,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind, n_agents: usize, max_iter: usize, seed: u64) -> Self {
        Self {
            kind,
            n_agents,
            max_iter,
            seed,
            parallel: false,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn validate(&self) -> Result<()> {
        let min_agents = if matches!(self.kind, OptimizerKind::Gwo) { 3 } else { 2 };
        if self.n_agents < min_agents {
            return Err(Error::Config(format!(
                "{} needs at least {min_agents} agents, got {}",
                self.name(),
                self.n_agents
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        match self.kind {
            OptimizerKind::Gwo => {}
            OptimizerKind::Pso {
                inertia,
                cognitive,
                social,
            } => {
                if ![inertia, cognitive, social].iter().all(|v| v.is_finite() && *v >= 0.0) {
                    return Err(Error::Config("PSO coefficients must be non-negative".into()));
                }
            }
            OptimizerKind::Ga {
                crossover_rate,
                mutation_rate,
                tournament_size,
            } => {
                if !rate_ok(crossover_rate) || !mutation_rate.is_none_or(rate_ok) {
                    return Err(Error::Config("GA rates must lie in [0, 1]".into()));
                }
                if tournament_size == 0 {
                    return Err(Error::Config("tournament size must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Runs `spec` on `objective` over `[low, high]^dim`. Every optimizer keeps
/// an elitist best-so-far and draws from one seeded stream.
pub fn run_optimizer<O: Objective + ?Sized>(
    spec: &OptimizerSpec,
    objective: &O,
    dim: usize,
    bounds: (f64, f64),
) -> Result<OptimizeResult> {
    spec.validate()?;
    if dim == 0 {
        return Err(Error::Config("dim must be at least 1".into()));
    }
    if !(bounds.0 < bounds.1) {
        return Err(Error::Config(format!("invalid bounds {bounds:?}")));
    }
    match spec.kind {
        OptimizerKind::Gwo => {
            let config = GwoConfig {
                n_agents: spec.n_agents,
                max_iter: spec.max_iter,
                dim,
                bounds,
                seed: spec.seed,
                parallel: spec.parallel,
            };
            optimize(&config, objective)
        }
        OptimizerKind::Pso {
            inertia,
            cognitive,
            social,
        } => pso(
            PsoParams {
                inertia,
                cognitive,
                social,
            },
            spec.n_agents,
            spec.max_iter,
            dim,
            bounds,
            spec.seed,
            spec.parallel,
            objective,
        ),
        OptimizerKind::Ga {
            crossover_rate,
            mutation_rate,
            tournament_size,
        } => ga(
            GaParams {
                crossover_rate,
                mutation_rate,
                tournament_size,
            },
            spec.n_agents,
            spec.max_iter,
            dim,
            bounds,
            spec.seed,
            spec.parallel,
            objective,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledFeatureSet;
    use crate::gwo::{binarize, SelectionObjective};
    use crate::classify::ClassifierConfig;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn sphere(x: &[f64]) -> f64 {
        TestFunction::Sphere.evaluate(x)
    }

    #[test]
    fn gwo_delegates() {
        let spec = OptimizerSpec::new(OptimizerKind::Gwo, 10, 20, 3);
        let via_facade = run_optimizer(&spec, &sphere, 4, (-5.0, 5.0)).unwrap();
        let direct = optimize(
            &GwoConfig {
                n_agents: 10,
                max_iter: 20,
                dim: 4,
                bounds: (-5.0, 5.0),
                seed: 3,
                parallel: false,
            },
            &sphere,
        )
        .unwrap();
        assert_eq!(via_facade, direct);
    }

    #[test]
    fn pso_sphere_reference_run() {
        let spec = OptimizerSpec::new(OptimizerKind::pso(), 30, 200, 11);
        let r = run_optimizer(&spec, &sphere, 5, (-5.0, 5.0)).unwrap();
        assert!(r.best_fitness < 1e-2, "{}", r.best_fitness);
    }

    #[test]
    fn ga_one_max_via_negative_lambda() {
        // every column is a copy of the label, so accuracy is always 1 and
        // fitness reduces to lambda * |mask| / dim: with lambda < 0 the
        // optimum is the full mask
        let labels: Vec<usize> = (0..30).map(|i| i % 2).collect();
        let x = Array2::from_shape_fn((30, 10), |(r, _)| labels[r] as f64);
        let set = LabeledFeatureSet::new(x, labels, 2).unwrap();
        let idx: Vec<usize> = (0..30).collect();
        let (train, val) = (set.select_rows(&idx[..20]), set.select_rows(&idx[20..]));
        let objective =
            SelectionObjective::new(&train, &val, ClassifierConfig::Knn { k: 1 }).with_lambda(-1.0);
        let spec = OptimizerSpec::new(OptimizerKind::ga(), 20, 100, 5);
        let r = run_optimizer(&spec, &objective, 10, (0.0, 1.0)).unwrap();
        assert_eq!(binarize(&r.best_position, 0.5).len(), 10);
        assert_eq!(r.best_fitness, -1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(OptimizerSpec::new(OptimizerKind::Gwo, 2, 5, 0).validate().is_err());
        assert!(OptimizerSpec::new(OptimizerKind::pso(), 2, 5, 0).validate().is_ok());
        let bad = OptimizerKind::Ga {
            crossover_rate: 1.5,
            mutation_rate: None,
            tournament_size: 3,
        };
        assert!(OptimizerSpec::new(bad, 5, 5, 0).validate().is_err());
        assert!(OptimizerKind::from_name("woa").is_err());
        let json = serde_json::to_string(&OptimizerSpec::new(OptimizerKind::pso(), 5, 5, 0)).unwrap();
        assert!(json.contains(r#""kind":"pso""#));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bounded_and_monotone(seed in any::<u64>(), which in 0usize..3, dim in 1usize..4) {
            let kind = [OptimizerKind::Gwo, OptimizerKind::pso(), OptimizerKind::ga()][which];
            let spec = OptimizerSpec::new(kind, 8, 25, seed);
            let f = TestFunction::Rastrigin;
            let bounds = f.bounds();
            let seen = std::sync::Mutex::new(Vec::new());
            let objective = |x: &[f64]| {
                seen.lock().unwrap().push(x.to_vec());
                f.evaluate(x)
            };
            let r = run_optimizer(&spec, &objective, dim, bounds).unwrap();
            prop_assert_eq!(r.history.len(), 25);
            prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(*r.history.last().unwrap(), r.best_fitness);
            let seen = seen.into_inner().unwrap();
            prop_assert!(seen.iter().flatten().all(|v| (bounds.0..=bounds.1).contains(v)));
        }
    }
}
