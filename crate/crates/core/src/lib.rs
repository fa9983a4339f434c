//! Damped, regularized stochastic L-BFGS for logistic regression and
//! delta-method Bayesian logistic regression, with first-order baselines,
//! data handling and an experiment harness.

pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod optim;
pub mod problems;
pub mod rng;

pub use error::{Error, Result};
