//! First-order solvers over a [`ConstraintSet`](crate::ConstraintSet).
//!
//! Every run owns a ChaCha stream derived from its seed, so a `(problem, options, seed)`
//! triple always yields the same [`Trajectory`].

mod ascent;
mod schedule;
mod stationarity;
mod trajectory;

pub use ascent::{
    default_theoretical_schedule, estimate_sigma, frank_wolfe, gradient_ascent_fixed_point, gradient_into, sga, sma,
    AscentOptions, GradientMode, ENTROPY_FLOOR,
};
pub use schedule::StepSchedule;
pub use stationarity::{
    gap_with_gradient, is_certified_stationary, stationarity_gap, stationary_value_bound, STATIONARY_TOL,
};
pub use trajectory::{sample_index, sample_output, OutputRule, StepRecord, Trajectory};
