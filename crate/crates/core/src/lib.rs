//! Maximization of monotone (weakly) DR-submodular functions over convex bodies.
//!
//! The crate is organized bottom-up:
//!
//! - [`objectives`]: discrete submodular set functions, their multilinear extensions,
//!   exact and unbiased stochastic gradient oracles, and structural property checks.
//! - [`geometry`]: constraint bodies with Euclidean and KL projections, linear
//!   maximization and diameters.
//! - [`solvers`]: projected stochastic gradient ascent, stochastic mirror ascent,
//!   a stochastic Frank-Wolfe baseline, step schedules and stationarity certificates.
//! - [`discrete`]: greedy, randomized pipage rounding and empirical set objectives.
//! - [`adversarial`]: the two hard instances (a tight stationary point and a
//!   Frank-Wolfe failure family) with their ground-truth quantities.
//! - [`harness`]: ratings ingestion, experiment configs, runs and CSV output.

pub mod adversarial;
pub mod discrete;
mod error;
pub mod geometry;
pub mod harness;
pub mod objectives;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{ConstraintSet, MirrorMap};
pub use objectives::{ContinuousObjective, SetFunction, Subset};
pub use solvers::{GradientMode, StepSchedule, Trajectory};
