use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gibbs::read_rng;
use super::{QuboProblem, Result, SampleSet, SamplerError};
use crate::Scalar;

/// Geometric inverse-temperature ramp for simulated annealing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
    /// Independent anneals per read; the lowest-energy final state is kept.
    pub num_restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            beta_start: 0.1,
            beta_end: 5.0,
            sweeps: 1000,
            num_restarts: 1,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start && self.beta_end.is_finite()) {
            return Err(SamplerError::InvalidArgument(format!(
                "schedule needs 0 < beta_start <= beta_end, got {} -> {}",
                self.beta_start, self.beta_end
            )));
        }
        if self.sweeps == 0 || self.num_restarts == 0 {
            return Err(SamplerError::InvalidArgument(
                "schedule needs at least one sweep and one restart".into(),
            ));
        }
        Ok(())
    }

    /// Inverse temperature used for each sweep.
    pub fn betas(&self) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![self.beta_end];
        }
        let ratio = self.beta_end / self.beta_start;
        let last = (self.sweeps - 1) as f64;
        (0..self.sweeps)
            .map(|s| self.beta_start * ratio.powf(s as f64 / last))
            .collect()
    }
}

fn anneal_once<T: Scalar, R: Rng>(
    problem: &QuboProblem<T>,
    adjacency: &[Vec<(usize, T)>],
    betas: &[T],
    rng: &mut R,
) -> Vec<u8> {
    let n = problem.n_vars();
    let mut x: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
    // field_i = linear_i + Σ_j q_ij x_j, so flipping i changes E by (1 − 2x_i)·field_i
    let mut field: Vec<T> = problem.linear().to_vec();
    for (i, nbrs) in adjacency.iter().enumerate() {
        for &(j, q) in nbrs {
            if x[j] == 1 {
                field[i] += q;
            }
        }
    }
    for &beta in betas {
        for i in 0..n {
            let delta = if x[i] == 1 { -field[i] } else { field[i] };
            let accept = delta <= T::zero() || T::lit(rng.random::<f64>()) < (-beta * delta).exp();
            if accept {
                let step = if x[i] == 1 { -T::one() } else { T::one() };
                x[i] ^= 1;
                for &(j, q) in &adjacency[i] {
                    field[j] += step * q;
                }
            }
        }
    }
    x
}

/// Simulated annealing with single-flip Metropolis sweeps over a geometric
/// beta ramp. Each read records the final state of its anneal.
pub fn sa_sample<T: Scalar>(problem: &QuboProblem<T>, schedule: &AnnealSchedule, num_reads: usize, seed: u64) -> Result<SampleSet<T>> {
    schedule.validate()?;
    let adjacency = problem.neighbors();
    let betas: Vec<T> = schedule.betas().into_iter().map(T::lit).collect();
    let reads: Vec<Vec<u8>> = (0..num_reads)
        .into_par_iter()
        .map(|r| {
            let mut rng = read_rng(seed, r);
            let mut best: Option<(Vec<u8>, T)> = None;
            for _ in 0..schedule.num_restarts {
                let x = anneal_once(problem, &adjacency, &betas, &mut rng);
                let e = problem.energy_unchecked(&x);
                if best.as_ref().is_none_or(|(_, b)| e < *b) {
                    best = Some((x, e));
                }
            }
            best.expect("at least one restart").0
        })
        .collect();
    Ok(SampleSet::from_reads(
        problem,
        reads,
        format!(
            "simulated-annealing(beta {}->{}, sweeps={}, restarts={}, seed={seed})",
            schedule.beta_start, schedule.beta_end, schedule.sweeps, schedule.num_restarts
        ),
    ))
}
