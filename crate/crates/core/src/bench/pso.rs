use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gwo::OptimizeResult;
use crate::objective::{evaluate_all, Objective, Scored};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
        }
    }
}

/// Global-best particle swarm; velocities are clamped to the box width.
#[allow(clippy::too_many_arguments)]
pub fn pso<O: Objective + ?Sized>(
    params: PsoParams,
    n_agents: usize,
    max_iter: usize,
    dim: usize,
    (low, high): (f64, f64),
    seed: u64,
    parallel: bool,
    objective: &O,
) -> Result<OptimizeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v_max = high - low;
    let mut x: Vec<Vec<f64>> = (0..n_agents)
        .map(|_| (0..dim).map(|_| rng.random_range(low..high)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n_agents)
        .map(|_| (0..dim).map(|_| 0.2 * v_max * (2.0 * rng.random::<f64>() - 1.0)).collect())
        .collect();
    let fitness = evaluate_all(objective, &x, parallel)?;
    let mut personal: Vec<Scored> = x
        .iter()
        .zip(&fitness)
        .map(|(p, &f)| Scored {
            position: p.clone(),
            fitness: f,
            tie: objective.tie_key(p),
        })
        .collect();
    let mut global = Scored::unevaluated(dim);
    for p in &personal {
        if p.beats(&global) {
            global = p.clone();
        }
    }
    let mut history = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        for i in 0..n_agents {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let vel = params.inertia * v[i][d]
                    + params.cognitive * r1 * (personal[i].position[d] - x[i][d])
                    + params.social * r2 * (global.position[d] - x[i][d]);
                v[i][d] = vel.clamp(-v_max, v_max);
                x[i][d] = (x[i][d] + v[i][d]).clamp(low, high);
            }
        }
        let fitness = evaluate_all(objective, &x, parallel)?;
        for (i, &f) in fitness.iter().enumerate() {
            let candidate = Scored {
                position: x[i].clone(),
                fitness: f,
                tie: objective.tie_key(&x[i]),
            };
            if candidate.beats(&personal[i]) {
                personal[i] = candidate;
            }
            if personal[i].beats(&global) {
                global = personal[i].clone();
            }
        }
        history.push(global.fitness);
    }
    Ok(OptimizeResult {
        best_position: global.position,
        best_fitness: global.fitness,
        history,
    })
}
