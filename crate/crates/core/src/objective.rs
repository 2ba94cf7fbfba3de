use crate::error::{Error, Result};

/// A minimization target over a bounded box.
///
/// Implementations must tolerate concurrent calls; population optimizers may
/// evaluate a whole generation in parallel.
pub trait Objective: Sync {
    fn evaluate(&self, position: &[f64]) -> Result<f64>;

    /// Secondary ordering key for equal fitness values, lower wins.
    fn tie_key(&self, _position: &[f64]) -> usize {
        0
    }
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn evaluate(&self, position: &[f64]) -> Result<f64> {
        Ok(self(position))
    }
}

/// Evaluates and rejects non-finite values, reporting the position.
pub(crate) fn checked<O: Objective + ?Sized>(objective: &O, position: &[f64]) -> Result<f64> {
    let value = objective.evaluate(position)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteFitness {
            value,
            position: position.to_vec(),
        })
    }
}

/// Fitness of every row, in row order. Runs on the rayon pool when
/// `parallel` is set; the result does not depend on it.
pub(crate) fn evaluate_all<O: Objective + ?Sized>(
    objective: &O,
    positions: &[Vec<f64>],
    parallel: bool,
) -> Result<Vec<f64>> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return positions.par_iter().map(|p| checked(objective, p)).collect();
    }
    let _ = parallel;
    positions.iter().map(|p| checked(objective, p)).collect()
}

/// Scored candidate used for elitist best-so-far bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub tie: usize,
}

impl Scored {
    pub fn unevaluated(dim: usize) -> Self {
        Self {
            position: vec![0.0; dim],
            fitness: f64::INFINITY,
            tie: usize::MAX,
        }
    }

    /// Strictly better: lower fitness, or equal fitness with a lower tie key.
    pub fn beats(&self, other: &Scored) -> bool {
        self.fitness < other.fitness || (self.fitness == other.fitness && self.tie < other.tie)
    }
}
