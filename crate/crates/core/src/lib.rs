//! Bounds and Monte Carlo validation for joint sparsity pattern estimation
//! with diversity.
//!
//! `J` signal vectors share one sparsity pattern of size `k = κn`. Each is
//! measured through its own Gaussian matrix:
//! `Y_j = sqrt(SNR / k) A_j X_j + W_j`. The crate evaluates how many
//! measurements suffice, or are necessary, to estimate the shared pattern up
//! to a normalized distortion `α`. It also simulates the estimators
//! involved so the bounds can be checked at finite size.
//!
//! Layers, bottom up:
//!
//! - [`special`]: gamma and normal families, chi-square quantiles, quadrature.
//! - [`info`]: entropy rate, diversity power, conditional entropy power,
//!   mutual information of the sparse Gaussian scalar channel.
//! - [`bounds`]: achievability and converse rates, the scalar-channel noise
//!   powers of the matched filter, LASSO and MMSE, two-stage rates.
//! - [`simulator`]: synthetic instances and the estimators themselves.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod error;
pub mod info;
mod search;
pub mod simulator;
pub mod special;

pub use bounds::{EstimatorKind, ProblemConfig, ScalarChannel};
pub use error::{Error, Result};
pub use simulator::{EstimationResult, Instance};
