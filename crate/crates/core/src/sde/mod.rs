//! Mild-solution simulation of `dX = (AX + F(t,X))dt + G(t,X)dW` with a
//! diagonal dissipative `A`, plus the contraction constants and closed-form
//! references used to validate it.

pub mod contraction;
pub mod deterministic;
pub mod noise;
pub mod ou;
pub mod problem;
pub mod semigroup;
pub mod solver;

pub use contraction::{kappa_profile, stepanov_norm, theta_prime_st, theta_st, KappaProfile, ThetaPrime};
pub use deterministic::deterministic_mild_solve;
pub use noise::BrownianDriver;
pub use ou::{ou_exact, ou_exact_ensemble, ou_stationary_variance, ou_transition};
pub use problem::{required_memory, SdeProblem, SolverConfig};
pub use semigroup::semigroup_apply;
pub use solver::{exponential_euler_solve, picard_solve, sup_rms_distance, Ensemble, SolverKind};
