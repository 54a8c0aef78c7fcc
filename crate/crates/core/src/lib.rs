//! Simulation lab for Gaussian Thompson sampling with optimism.
//!
//! The crate implements vanilla, variance-inflated and mean-bonus Thompson
//! sampling on unit-variance Gaussian bandits, checks their pull counts
//! against deterministic stability targets, measures Wald-interval coverage
//! under adaptive sampling, and numerically verifies the winner-map,
//! perturbation and geometric log-growth facts behind the stability analysis.
//!
//! Closed-form pieces (special functions, estimators, intervals, targets,
//! schedules) are generic over [`Real`]; the simulation engine runs in `f64`.
//! The aliases below name the common instantiations.

pub mod bandit_env;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod inference;
pub mod policies;
pub mod scalar;
pub mod stability_lab;
pub mod stats_core;

pub use error::{LabError, Result};
pub use scalar::Real;

pub type Bandit = bandit_env::BanditInstance<f64>;
pub type Bandit32 = bandit_env::BanditInstance<f32>;
pub type Policy = policies::PolicyState<f64>;
pub type Policy32 = policies::PolicyState<f32>;
pub type Estimate = inference::ArmEstimate<f64>;
pub type Estimate32 = inference::ArmEstimate<f32>;
pub type Interval = inference::WaldInterval<f64>;
pub type Interval32 = inference::WaldInterval<f32>;
pub type Target = stability_lab::StabilityTarget<f64>;
pub type Target32 = stability_lab::StabilityTarget<f32>;
