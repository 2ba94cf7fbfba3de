//! Continuous Grey Wolf Optimizer and its binary feature-selection wrapper.
//!
//! Every agent moves toward the average of three candidate points, one per
//! leader (alpha, beta, delta). For a leader at `x_l` the candidate is
//! `x_l - A * |C * x_l - x|` with `A = 2a*r1 - a` and `C = 2*r2`, drawn fresh
//! per leader and per dimension. The control scalar `a` falls linearly from
//! 2 to 0 over the run, shifting the pack from exploration (`|A| > 1`) to
//! exploitation (`|A| < 1`).
//!
//! Leaders are elitist: a slot is only taken over by a strictly better
//! candidate, so the alpha fitness never regresses.

mod selection;

pub use selection::{
    binarize, select_features, select_features_with, selection_fitness, FeatureMask, SelectionObjective,
    SelectionResult, DEFAULT_LAMBDA, DEFAULT_THRESHOLD,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{evaluate_all, Objective, Scored};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GwoConfig {
    pub n_agents: usize,
    pub max_iter: usize,
    pub dim: usize,
    pub bounds: (f64, f64),
    pub seed: u64,
    /// Evaluate each generation on the rayon pool. Results are identical
    /// either way.
    pub parallel: bool,
}

impl Default for GwoConfig {
    fn default() -> Self {
        Self {
            n_agents: 30,
            max_iter: 100,
            dim: 1,
            bounds: (0.0, 1.0),
            seed: 0,
            parallel: false,
        }
    }
}

impl GwoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 3 {
            return Err(Error::Config(format!(
                "GWO needs at least 3 agents, got {}",
                self.n_agents
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        let (low, high) = self.bounds;
        if !(low < high) || !low.is_finite() || !high.is_finite() {
            return Err(Error::Config(format!("invalid bounds ({low}, {high})")));
        }
        Ok(())
    }
}

/// `A = 2a*r1 - a`.
pub fn coefficient_a(a: f64, r1: f64) -> f64 {
    2.0 * a * r1 - a
}

/// `C = 2*r2`.
pub fn coefficient_c(r2: f64) -> f64 {
    2.0 * r2
}

/// One coordinate of the encircling move around a leader (or the prey):
/// `D = |C*x_p - x|`, result `x_p - A*D`.
pub fn encircle(leader: f64, current: f64, a_coef: f64, c_coef: f64) -> f64 {
    let distance = (c_coef * leader - current).abs();
    leader - a_coef * distance
}

/// Linear control schedule `a(t) = 2 * (1 - t / max_iter)`.
pub fn control_parameter(t: usize, max_iter: usize) -> f64 {
    2.0 * (1.0 - t as f64 / max_iter as f64)
}

/// Population state between iterations.
#[derive(Debug, Clone)]
pub struct WolfPack {
    positions: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    leaders: [Scored; 3],
    a: f64,
    t: usize,
    max_iter: usize,
    bounds: (f64, f64),
    parallel: bool,
    evaluated: bool,
    max_abs_a: f64,
    rng: ChaCha8Rng,
}

/// Uniform positions in the box; nothing is evaluated yet.
pub fn init_pack(config: &GwoConfig) -> Result<WolfPack> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (low, high) = config.bounds;
    let positions = (0..config.n_agents)
        .map(|_| {
            (0..config.dim)
                .map(|_| low + (high - low) * rng.random::<f64>())
                .collect()
        })
        .collect();
    Ok(WolfPack {
        positions,
        fitness: vec![f64::INFINITY; config.n_agents],
        leaders: std::array::from_fn(|_| Scored::unevaluated(config.dim)),
        a: control_parameter(0, config.max_iter),
        t: 0,
        max_iter: config.max_iter,
        bounds: config.bounds,
        parallel: config.parallel,
        evaluated: false,
        max_abs_a: 0.0,
        rng,
    })
}

impl WolfPack {
    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    /// Current agent fitness; `INFINITY` before the first evaluation.
    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn alpha(&self) -> &Scored {
        &self.leaders[0]
    }

    pub fn beta(&self) -> &Scored {
        &self.leaders[1]
    }

    pub fn delta(&self) -> &Scored {
        &self.leaders[2]
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn iteration(&self) -> usize {
        self.t
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.max_iter
    }

    /// Largest `|A|` drawn during the last step.
    pub fn last_max_abs_a(&self) -> f64 {
        self.max_abs_a
    }

    fn absorb<O: Objective + ?Sized>(&mut self, objective: &O, fitness: Vec<f64>) {
        for (position, &f) in self.positions.iter().zip(&fitness) {
            let candidate = Scored {
                position: position.clone(),
                fitness: f,
                tie: objective.tie_key(position),
            };
            if candidate.beats(&self.leaders[0]) {
                self.leaders.rotate_right(1);
                self.leaders[0] = candidate;
            } else if candidate.beats(&self.leaders[1]) {
                self.leaders[2] = std::mem::replace(&mut self.leaders[1], candidate);
            } else if candidate.beats(&self.leaders[2]) {
                self.leaders[2] = candidate;
            }
        }
        self.fitness = fitness;
    }

    /// Scores the initial population and elects the first leaders. Called
    /// implicitly by the first [`step`](Self::step).
    pub fn evaluate<O: Objective + ?Sized>(&mut self, objective: &O) -> Result<()> {
        let fitness = evaluate_all(objective, &self.positions, self.parallel)?;
        self.absorb(objective, fitness);
        self.evaluated = true;
        Ok(())
    }

    /// One iteration: move every agent, clamp, evaluate, update leaders and
    /// advance the schedule.
    pub fn step<O: Objective + ?Sized>(&mut self, objective: &O) -> Result<()> {
        if self.is_finished() {
            return Err(Error::Config(format!(
                "pack already ran its {} iterations",
                self.max_iter
            )));
        }
        if !self.evaluated {
            self.evaluate(objective)?;
        }
        let a = self.a;
        let (low, high) = self.bounds;
        let dim = self.leaders[0].position.len();
        let mut max_abs_a = 0.0f64;
        let mut candidate = vec![0.0; dim];
        for agent in 0..self.positions.len() {
            candidate.iter_mut().for_each(|c| *c = 0.0);
            for leader in &self.leaders {
                for (d, c) in candidate.iter_mut().enumerate() {
                    let r1: f64 = self.rng.random();
                    let r2: f64 = self.rng.random();
                    let big_a = coefficient_a(a, r1);
                    max_abs_a = max_abs_a.max(big_a.abs());
                    *c += encircle(
                        leader.position[d],
                        self.positions[agent][d],
                        big_a,
                        coefficient_c(r2),
                    );
                }
            }
            for (x, c) in self.positions[agent].iter_mut().zip(&candidate) {
                *x = (c / 3.0).clamp(low, high);
            }
        }
        self.max_abs_a = max_abs_a;
        let fitness = evaluate_all(objective, &self.positions, self.parallel)?;
        self.absorb(objective, fitness);
        self.t += 1;
        self.a = control_parameter(self.t, self.max_iter);
        Ok(())
    }
}

/// One GWO iteration on `pack`.
pub fn gwo_step<O: Objective + ?Sized>(pack: &mut WolfPack, objective: &O) -> Result<()> {
    pack.step(objective)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Alpha fitness after each iteration.
    pub history: Vec<f64>,
}

pub fn optimize<O: Objective + ?Sized>(config: &GwoConfig, objective: &O) -> Result<OptimizeResult> {
    let mut pack = init_pack(config)?;
    let mut history = Vec::with_capacity(config.max_iter);
    while !pack.is_finished() {
        pack.step(objective)?;
        history.push(pack.alpha().fitness);
    }
    Ok(OptimizeResult {
        best_position: pack.alpha().position.clone(),
        best_fitness: pack.alpha().fitness,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn config(n_agents: usize, max_iter: usize, dim: usize, bounds: (f64, f64), seed: u64) -> GwoConfig {
        GwoConfig {
            n_agents,
            max_iter,
            dim,
            bounds,
            seed,
            parallel: false,
        }
    }

    #[test]
    fn init_is_reproducible_and_in_bounds() {
        let c = config(3, 10, 1, (0.0, 1.0), 42);
        let a = init_pack(&c).unwrap();
        let b = init_pack(&c).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert!(a.positions().iter().flatten().all(|&x| (0.0..1.0).contains(&x)));
        assert_eq!(a.a(), 2.0);
        assert_eq!(a.iteration(), 0);
    }

    #[test]
    fn too_few_agents() {
        assert!(matches!(
            init_pack(&config(2, 10, 1, (0.0, 1.0), 0)),
            Err(Error::Config(_))
        ));
        assert!(init_pack(&config(3, 0, 1, (0.0, 1.0), 0)).is_err());
        assert!(init_pack(&config(3, 1, 1, (1.0, 1.0), 0)).is_err());
    }

    #[test]
    fn constant_landscape() {
        let c = config(5, 20, 3, (-1.0, 1.0), 1);
        let r = optimize(&c, &|_: &[f64]| 4.25).unwrap();
        assert_eq!(r.best_fitness, 4.25);
        assert!(r.history.iter().all(|&h| h == 4.25));
    }

    #[test]
    fn schedule_reaches_zero() {
        let c = config(4, 7, 2, (-1.0, 1.0), 3);
        let mut pack = init_pack(&c).unwrap();
        for t in 0..7 {
            assert_eq!(pack.a(), control_parameter(t, 7));
            pack.step(&sphere).unwrap();
        }
        assert_eq!(pack.a(), 0.0);
        assert!(pack.step(&sphere).is_err());
    }

    #[test]
    fn sphere_reference_run() {
        let r = optimize(&config(30, 200, 5, (-5.0, 5.0), 7), &sphere).unwrap();
        assert!(r.best_fitness < 1e-3, "{}", r.best_fitness);
        assert_eq!(r.history.len(), 200);
    }

    #[test]
    fn one_dimensional_bowl() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2);
        let r = optimize(&config(10, 100, 1, (0.0, 1.0), 5), &f).unwrap();
        assert!((r.best_position[0] - 0.3).abs() < 0.01);
    }

    #[test]
    fn single_iteration_history() {
        let r = optimize(&config(3, 1, 2, (0.0, 1.0), 0), &sphere).unwrap();
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn non_finite_fitness_aborts() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { 0.0 };
        let err = optimize(&config(10, 5, 1, (0.0, 1.0), 0), &f).unwrap_err();
        match err {
            Error::NonFiniteFitness { position, .. } => assert!(position[0] > 0.5),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let mut c = config(12, 30, 4, (-3.0, 3.0), 99);
        let serial = optimize(&c, &sphere).unwrap();
        c.parallel = true;
        assert_eq!(optimize(&c, &sphere).unwrap(), serial);
    }

    #[test]
    fn encircle_matches_hand_values() {
        // D = |1.5*2 - 1| = 2, x = 2 - 0.5*2 = 1
        assert_eq!(encircle(2.0, 1.0, 0.5, 1.5), 1.0);
        assert_eq!(coefficient_a(2.0, 1.0), 2.0);
        assert_eq!(coefficient_a(2.0, 0.0), -2.0);
        assert_eq!(coefficient_c(0.5), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn step_invariants(seed in any::<u64>(), agents in 3usize..12, dim in 1usize..5,
                           centre in proptest::collection::vec(-2.0f64..2.0, 5)) {
            let c = config(agents, 15, dim, (-2.0, 2.0), seed);
            let f = |x: &[f64]| x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b) * 1.5).sum::<f64>();
            let mut pack = init_pack(&c).unwrap();
            let mut last = f64::INFINITY;
            while !pack.is_finished() {
                let a_before = pack.a();
                pack.step(&f).unwrap();
                prop_assert!(pack.last_max_abs_a() <= 2.0 * a_before + 1e-12);
                prop_assert!(pack.positions().iter().flatten().all(|&x| (-2.0..=2.0).contains(&x)));
                prop_assert!(pack.alpha().fitness <= pack.beta().fitness);
                prop_assert!(pack.beta().fitness <= pack.delta().fitness);
                prop_assert!(pack.alpha().fitness <= last);
                last = pack.alpha().fitness;
                prop_assert_eq!(pack.a(), control_parameter(pack.iteration(), 15));
            }
            prop_assert_eq!(pack.a(), 0.0);
        }
    }
}
