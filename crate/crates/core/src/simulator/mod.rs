//! Synthetic instances of the measurement model, the support estimators and
//! a seeded Monte Carlo driver.

mod estimators;
mod instance;
mod monte_carlo;
pub mod rng;

pub use estimators::{
    amp_estimate, binomial, distortion, empirical_diversity_power, joint_threshold, lasso_estimate, lasso_objective,
    matched_filter_estimate, minimax_threshold, nearest_subspace_estimate, sigma2_from_median, AmpSolution,
    Diagnostics, EstimationResult, EstimatorId, LassoSolution, ThresholdEstimate, ThresholdRule, NS_SUBSET_LIMIT,
};
pub use instance::{draw_support_and_signals, generate_instance, Instance, InstanceParams};
pub use monte_carlo::{
    monte_carlo, quantile, recheck, resolve_lambda, run_trial, MonteCarloConfig, MonteCarloSummary, Pipeline,
    TrialResult,
};
