use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gwo::OptimizeResult;
use crate::objective::{evaluate_all, Objective, Scored};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub crossover_rate: f64,
    /// Per-gene reset probability; `None` means `1 / dim`.
    pub mutation_rate: Option<f64>,
    pub tournament_size: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_rate: 0.9,
            mutation_rate: None,
            tournament_size: 3,
        }
    }
}

fn tournament(rng: &mut ChaCha8Rng, pop: &[Scored], size: usize) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let i = rng.random_range(0..pop.len());
        if pop[i].beats(&pop[best]) || (!pop[best].beats(&pop[i]) && i < best) {
            best = i;
        }
    }
    best
}

/// Generational GA over the box: tournament selection, uniform crossover,
/// uniform-reset mutation, one elite carried over unchanged.
#[allow(clippy::too_many_arguments)]
pub fn ga<O: Objective + ?Sized>(
    params: GaParams,
    n_agents: usize,
    max_iter: usize,
    dim: usize,
    (low, high): (f64, f64),
    seed: u64,
    parallel: bool,
    objective: &O,
) -> Result<OptimizeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mutation_rate = params.mutation_rate.unwrap_or(1.0 / dim as f64);
    let score = |positions: Vec<Vec<f64>>| -> Result<Vec<Scored>> {
        let fitness = evaluate_all(objective, &positions, parallel)?;
        Ok(positions
            .into_iter()
            .zip(fitness)
            .map(|(p, f)| Scored {
                tie: objective.tie_key(&p),
                position: p,
                fitness: f,
            })
            .collect())
    };
    let init = (0..n_agents)
        .map(|_| (0..dim).map(|_| rng.random_range(low..high)).collect())
        .collect();
    let mut pop = score(init)?;
    let mut best = Scored::unevaluated(dim);
    for s in &pop {
        if s.beats(&best) {
            best = s.clone();
        }
    }
    let mut history = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        let mut children = Vec::with_capacity(n_agents - 1);
        for _ in 1..n_agents {
            let a = tournament(&mut rng, &pop, params.tournament_size);
            let b = tournament(&mut rng, &pop, params.tournament_size);
            let mut child = pop[a].position.clone();
            if rng.random::<f64>() < params.crossover_rate {
                for (g, other) in child.iter_mut().zip(&pop[b].position) {
                    if rng.random::<bool>() {
                        *g = *other;
                    }
                }
            }
            for g in child.iter_mut() {
                if rng.random::<f64>() < mutation_rate {
                    *g = rng.random_range(low..high);
                }
            }
            children.push(child);
        }
        let mut next = Vec::with_capacity(n_agents);
        next.push(best.clone());
        next.extend(score(children)?);
        for s in &next[1..] {
            if s.beats(&best) {
                best = s.clone();
            }
        }
        pop = next;
        history.push(best.fitness);
    }
    Ok(OptimizeResult {
        best_position: best.position,
        best_fitness: best.fitness,
        history,
    })
}
