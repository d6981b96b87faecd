use rand::{Rng, RngCore};

use crate::{Error, Result};

/// Metadata for step `t`, taken at the iterate `x_t` the step starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub step: f64,
    pub grad_norm: f64,
    /// `F(x_t)` when value tracking is on and an exact value is available.
    pub value: Option<f64>,
    /// Cumulative single-function evaluations after this step.
    pub evals: u64,
}

/// Iterates `x_1 .. x_{T+1}` of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub solver: &'static str,
    pub seed: u64,
    pub iterates: Vec<Vec<f64>>,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    /// Number of steps `T`.
    pub fn iterations(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }

    /// `x_t`, 1-based.
    pub fn iterate(&self, t: usize) -> &[f64] {
        &self.iterates[t - 1]
    }

    pub fn last(&self) -> &[f64] {
        self.iterates.last().expect("trajectories hold at least x_1")
    }

    pub fn total_evals(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.evals)
    }
}

/// How the reported point is chosen from a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputRule {
    /// `τ` uniform on `{1, .., T}`.
    UniformOverT,
    /// `{2, .., T-1}` with probability `1/(T-1)` each, `1` and `T` with `1/(2(T-1))`.
    EndpointHalfWeighted,
    /// The final iterate `x_{T+1}`.
    Last,
}

/// Draws `τ` by `rule` and returns its 1-based index.
pub fn sample_index(iterations: usize, rule: OutputRule, rng: &mut dyn RngCore) -> Result<usize> {
    let t_max = iterations;
    match rule {
        _ if t_max == 0 => Err(Error::input("trajectory has no steps")),
        OutputRule::UniformOverT => Ok(rng.gen_range(1..=t_max)),
        OutputRule::EndpointHalfWeighted => {
            if t_max < 3 {
                return Err(Error::input(format!("endpoint-weighted sampling needs T >= 3 (got {t_max})")));
            }
            let r = rng.gen::<f64>() * (t_max - 1) as f64;
            Ok(if r < 0.5 {
                1
            } else if r >= t_max as f64 - 1.5 {
                t_max
            } else {
                2 + (r - 0.5).floor() as usize
            })
        }
        OutputRule::Last => Ok(t_max + 1),
    }
}

/// Returns `x_τ` for `τ` drawn by `rule`.
pub fn sample_output(traj: &Trajectory, rule: OutputRule, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    let tau = sample_index(traj.iterations(), rule, rng)?;
    Ok(traj.iterate(tau).to_vec())
}
