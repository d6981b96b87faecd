//! Submodular set functions, multilinear extensions and their oracles.

mod checks;
mod continuous;
mod multilinear;
mod ratings;
mod set_functions;
mod subset;

pub use checks::{
    check_dr_crossderiv, check_submodular_bruteforce, check_submodular_sampled, estimate_gamma, smoothness_bound_l1,
    BRUTE_FORCE_CAP,
};
pub use continuous::{
    stochastic_objective, ContinuousObjective, FnObjective, MultilinearExtension, Norm, Smoothness, StochasticObjective,
};
pub use multilinear::{
    multilinear_eval_exact, multilinear_eval_sampled, multilinear_grad_estimate, multilinear_grad_exact, ValueTable,
    EXACT_CAP, TABLE_CAP,
};
pub use ratings::RatingsMatrix;
pub use set_functions::{
    concave_over_modular, coverage_from_sets, facility_location, Average, Coverage, FnSetFunction, Modular,
    SetFunction, UserConcave, UserFacility,
};
pub use subset::Subset;
