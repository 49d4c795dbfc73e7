//! Seeded Monte Carlo over independent trials.

use super::estimators::{
    amp_estimate, distortion, joint_threshold, lasso_estimate, matched_filter_estimate, nearest_subspace_estimate,
    Diagnostics, EstimationResult, EstimatorId, ThresholdRule,
};
use super::instance::{draw_support_and_signals, Instance, InstanceParams};
use super::rng::{trial_seed, Rng, Stream};
use crate::bounds::{lasso_best_sigma2, ProblemConfig};
use crate::error::{ensure, Error, Result};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Estimator chain run on every trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Pipeline {
    /// Exhaustive nearest subspace search; ignores the threshold rule.
    NearestSubspace,
    MatchedFilter,
    /// Coordinate-descent LASSO, thresholding the shrunk estimates.
    /// `None` picks the penalty minimizing the predicted noise power.
    Lasso {
        lambda: Option<f64>,
    },
    /// AMP, thresholding the pseudo-data.
    Amp {
        lambda: Option<f64>,
    },
    /// AMP, thresholding the shrunk estimates.
    AmpShrunk {
        lambda: Option<f64>,
    },
    /// Skips the measurements: `v_j = X_j + σ W_j` directly.
    ScalarChannel {
        sigma2: f64,
    },
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::NearestSubspace => "ns",
            Pipeline::MatchedFilter => "mf",
            Pipeline::Lasso { .. } => "lasso",
            Pipeline::Amp { .. } => "amp",
            Pipeline::AmpShrunk { .. } => "amp_shrunk",
            Pipeline::ScalarChannel { .. } => "scalar",
        }
    }

    fn estimator(&self) -> EstimatorId {
        match self {
            Pipeline::NearestSubspace => EstimatorId::NearestSubspace,
            Pipeline::MatchedFilter => EstimatorId::MatchedFilter,
            Pipeline::Lasso { .. } => EstimatorId::Lasso,
            Pipeline::Amp { .. } => EstimatorId::Amp,
            Pipeline::AmpShrunk { .. } => EstimatorId::AmpShrunk,
            Pipeline::ScalarChannel { .. } => EstimatorId::ScalarChannel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub problem: ProblemConfig,
    pub n: usize,
    pub trials: usize,
    pub pipeline: Pipeline,
    pub threshold: ThresholdRule,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

impl MonteCarloConfig {
    /// `k = round(κn)` and `m = round(r n)`, both at least 1.
    pub fn dimensions(&self) -> (usize, usize) {
        let n = self.n as f64;
        let k = ((self.problem.kappa * n).round() as usize).max(1);
        let m = ((self.problem.per_vector_rate() * n).round() as usize).max(1);
        (k, m)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        if self.trials == 0 {
            return Err(Error::Invalid("need at least one trial".into()));
        }
        if self.n == 0 {
            return Err(Error::Invalid("need n >= 1".into()));
        }
        if let Pipeline::ScalarChannel { sigma2 } = self.pipeline {
            ensure(sigma2 >= 0.0 && sigma2.is_finite(), "sigma2", sigma2, "sigma2 >= 0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub result: EstimationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub mean: f64,
    pub std_err: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    /// Fraction of trials with distortion at most α.
    pub achieved_fraction: f64,
    /// Penalty used by the LASSO pipelines.
    pub lambda: Option<f64>,
    pub trials: Vec<TrialResult>,
}

/// Linear-interpolation quantile of sorted data (`(n-1)p` positions).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(trials: Vec<TrialResult>, alpha: f64, lambda: Option<f64>) -> MonteCarloSummary {
    let d: Vec<f64> = trials.iter().map(|t| t.result.distortion).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let std_err = if d.len() > 1 {
        (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let mut sorted = d.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    MonteCarloSummary {
        mean,
        std_err,
        q05: quantile(&sorted, 0.05),
        q50: quantile(&sorted, 0.5),
        q95: quantile(&sorted, 0.95),
        achieved_fraction: d.iter().filter(|&&x| x <= alpha).count() as f64 / n,
        lambda,
        trials,
    }
}

fn thresholded(
    support: &[usize],
    vectors: &[DVector<f64>],
    rule: ThresholdRule,
    id: EstimatorId,
    iterations: usize,
) -> Result<EstimationResult> {
    let est = joint_threshold(vectors, rule)?;
    EstimationResult::new(
        support,
        est.support,
        id,
        Diagnostics {
            iterations,
            residual_norm: 0.0,
            threshold: Some(est.threshold),
        },
    )
}

/// One trial of `cfg` at instance seed `seed`.
pub fn run_trial(cfg: &MonteCarloConfig, seed: u64, lambda: Option<f64>) -> Result<EstimationResult> {
    let (k, m) = cfg.dimensions();
    let j = cfg.problem.diversity as usize;
    let rule = cfg.threshold;
    let id = cfg.pipeline.estimator();
    if let Pipeline::ScalarChannel { sigma2 } = cfg.pipeline {
        let (support, mut vectors) = draw_support_and_signals(cfg.n, k, j, seed);
        let mut rng = Rng::stream(seed, Stream::Noise);
        let s = sigma2.sqrt();
        for v in &mut vectors {
            for x in v.iter_mut() {
                *x += s * rng.normal();
            }
        }
        return thresholded(&support, &vectors, rule, id, 0);
    }
    let inst = Instance::generate(&InstanceParams::new(cfg.n, k, j, m, cfg.problem.snr, seed))?;
    let lam = || lambda.ok_or_else(|| Error::Invalid("LASSO pipeline without a penalty".into()));
    match cfg.pipeline {
        Pipeline::NearestSubspace => nearest_subspace_estimate(&inst),
        Pipeline::MatchedFilter => thresholded(&inst.support, &matched_filter_estimate(&inst), rule, id, 0),
        Pipeline::Lasso { .. } => {
            let l = lam()?;
            let mut sweeps = 0;
            let mut v = Vec::with_capacity(j);
            for jj in 0..j {
                let sol = lasso_estimate(&inst, l, jj)?;
                sweeps += sol.sweeps;
                v.push(sol.x);
            }
            thresholded(&inst.support, &v, rule, id, sweeps)
        }
        Pipeline::Amp { .. } | Pipeline::AmpShrunk { .. } => {
            let l = lam()?;
            let shrunk = matches!(cfg.pipeline, Pipeline::AmpShrunk { .. });
            let mut iters = 0;
            let mut v = Vec::with_capacity(j);
            for jj in 0..j {
                let sol = amp_estimate(&inst, l, jj)?;
                iters += sol.iterations;
                v.push(if shrunk { sol.estimate } else { sol.pseudo_data });
            }
            thresholded(&inst.support, &v, rule, id, iters)
        }
        Pipeline::ScalarChannel { .. } => unreachable!(),
    }
}

/// Penalty the LASSO pipelines will use, if any.
pub fn resolve_lambda(cfg: &MonteCarloConfig) -> Result<Option<f64>> {
    match cfg.pipeline {
        Pipeline::Lasso { lambda } | Pipeline::Amp { lambda } | Pipeline::AmpShrunk { lambda } => match lambda {
            Some(l) => {
                ensure(l >= 0.0 && l.is_finite(), "lambda", l, "lambda >= 0")?;
                Ok(Some(l))
            }
            None => {
                let p = &cfg.problem;
                Ok(Some(lasso_best_sigma2(p.kappa, p.snr, p.per_vector_rate())?.1))
            }
        },
        _ => Ok(None),
    }
}

/// Runs `cfg.trials` trials, trial `i` seeded by `trial_seed(seed, i)`.
/// Results are collected in trial order, so the summary does not depend on
/// the number of workers.
pub fn monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloSummary> {
    cfg.validate()?;
    let lambda = resolve_lambda(cfg)?;
    let run = || -> Result<Vec<TrialResult>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|index| {
                let seed = trial_seed(cfg.seed, index as u64);
                run_trial(cfg, seed, lambda)
                    .map(|result| TrialResult { index, seed, result })
                    .map_err(|e| Error::Trial {
                        index,
                        source: Box::new(e),
                    })
            })
            .collect()
    };
    let trials = if cfg.workers == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?
            .install(run)?
    };
    Ok(summarize(trials, cfg.problem.alpha, lambda))
}

/// Recomputes each trial's distortion from its supports.
pub fn recheck(summary: &MonteCarloSummary, cfg: &MonteCarloConfig) -> Result<bool> {
    let (k, _) = cfg.dimensions();
    for t in &summary.trials {
        let (support, _) = draw_support_and_signals(cfg.n, k, cfg.problem.diversity as usize, t.seed);
        if distortion(&support, &t.result.estimated_support, k)? != t.result.distortion {
            return Ok(false);
        }
    }
    Ok(true)
}
