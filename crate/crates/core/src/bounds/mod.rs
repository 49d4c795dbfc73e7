//! Sampling-rate bounds for joint pattern recovery and the scalar-channel
//! models behind the two-stage estimators.
//!
//! All SNR arguments are linear. Rates are total rates `ρ = J r` unless a
//! function says otherwise.

mod curves;
mod scalar;
mod theorems;
mod two_stage;

pub use curves::{
    distortion_vs_rho, generate_curve, AbscissaKind, BoundCurve, BoundSource, CurvePoint, EnvelopeSide, OrdinateKind,
    Sweep,
};
pub use scalar::{
    lasso_active_prob, lasso_mse, lasso_state_evolution, mf_sigma2, mmse_sigma2, LassoFixedPoint, MmseObjective,
    MmseSolution,
};
pub use theorems::{high_snr_envelopes, lower_bound_rate, ns_upper_bound_rate, Envelopes};
pub use two_stage::{lasso_best_sigma2, sigma2_threshold, two_stage_distortion, two_stage_rate};

use crate::error::{ensure, Result};
use serde::{Deserialize, Serialize};

/// One point of the problem space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub kappa: f64,
    /// Linear SNR.
    pub snr: f64,
    #[serde(rename = "J")]
    pub diversity: u32,
    pub alpha: f64,
    /// Total sampling rate.
    pub rho: f64,
}

impl ProblemConfig {
    pub fn new(kappa: f64, snr: f64, diversity: u32, alpha: f64, rho: f64) -> Result<Self> {
        let c = Self {
            kappa,
            snr,
            diversity,
            alpha,
            rho,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_kappa(self.kappa)?;
        check_snr(self.snr)?;
        check_diversity(self.diversity)?;
        ensure(
            (0.0..=1.0).contains(&self.alpha),
            "alpha",
            self.alpha,
            "0 <= alpha <= 1",
        )?;
        ensure(self.rho > 0.0 && self.rho.is_finite(), "rho", self.rho, "rho > 0")
    }

    /// Per-vector sampling rate `r = ρ / J`.
    pub fn per_vector_rate(&self) -> f64 {
        self.rho / self.diversity as f64
    }
}

/// Which scalar-channel estimator feeds the joint threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    #[serde(rename = "mf")]
    MatchedFilter,
    Lasso,
    Mmse,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::MatchedFilter => "mf",
            EstimatorKind::Lasso => "lasso",
            EstimatorKind::Mmse => "mmse",
        }
    }
}

/// The equivalent channel `X + σW` seen by one coordinate of an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarChannel {
    pub kappa: f64,
    pub sigma2: f64,
    /// Soft threshold of the LASSO channel; `None` for the other estimators.
    pub threshold_t: Option<f64>,
    pub estimator_kind: EstimatorKind,
}

impl ScalarChannel {
    pub fn new(kappa: f64, sigma2: f64, threshold_t: Option<f64>, estimator_kind: EstimatorKind) -> Result<Self> {
        ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
        ensure(sigma2 > 0.0 && sigma2.is_finite(), "sigma2", sigma2, "sigma2 > 0")?;
        let is_lasso = estimator_kind == EstimatorKind::Lasso;
        if is_lasso != threshold_t.is_some() {
            return Err(crate::Error::Invalid(
                "a threshold is required for, and only for, the LASSO channel".into(),
            ));
        }
        if let Some(t) = threshold_t {
            ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")?;
        }
        Ok(Self {
            kappa,
            sigma2,
            threshold_t,
            estimator_kind,
        })
    }

    /// Matched-filter channel at per-vector rate `r`.
    pub fn matched_filter(kappa: f64, snr: f64, r: f64) -> Result<Self> {
        Self::new(kappa, mf_sigma2(kappa, snr, r)?, None, EstimatorKind::MatchedFilter)
    }

    /// LASSO channel at per-vector rate `r` and penalty `lambda`.
    pub fn lasso(kappa: f64, snr: f64, r: f64, lambda: f64) -> Result<Self> {
        let fp = lasso_state_evolution(kappa, snr, r, lambda)?;
        Self::new(kappa, fp.sigma2, Some(fp.t), EstimatorKind::Lasso)
    }

    /// Replica MMSE channel at per-vector rate `r`.
    pub fn mmse(kappa: f64, snr: f64, r: f64) -> Result<Self> {
        Self::new(kappa, mmse_sigma2(kappa, snr, r)?.sigma2, None, EstimatorKind::Mmse)
    }
}

/// `10^(dB/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10 log10(snr)`.
pub fn linear_to_db(snr: f64) -> f64 {
    10.0 * snr.log10()
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    ensure(kappa > 0.0 && kappa < 0.5, "kappa", kappa, "0 < kappa < 1/2")
}

pub(crate) fn check_snr(snr: f64) -> Result<()> {
    ensure(snr > 0.0 && !snr.is_nan(), "snr", snr, "snr > 0")
}

pub(crate) fn check_diversity(j: u32) -> Result<()> {
    ensure(j >= 1, "J", j as f64, "J >= 1")
}

pub(crate) fn check_rate(r: f64) -> Result<()> {
    ensure(r > 0.0 && r.is_finite(), "r", r, "r > 0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(ProblemConfig::new(1e-4, 1e4, 1, 0.1, 1.0).is_ok());
        assert!(ProblemConfig::new(0.5, 1e4, 1, 0.1, 1.0).is_err());
        assert!(ProblemConfig::new(0.1, 0.0, 1, 0.1, 1.0).is_err());
        assert!(ProblemConfig::new(0.1, 1.0, 0, 0.1, 1.0).is_err());
        assert!(ProblemConfig::new(0.1, 1.0, 1, 1.1, 1.0).is_err());
        assert!(ProblemConfig::new(0.1, 1.0, 1, 0.1, 0.0).is_err());
        let c = ProblemConfig::new(0.1, 1.0, 4, 0.1, 2.0).unwrap();
        assert_eq!(c.per_vector_rate(), 0.5);
    }

    #[test]
    fn scalar_channel_threshold_presence() {
        assert!(ScalarChannel::new(0.1, 0.5, Some(0.2), EstimatorKind::Lasso).is_ok());
        assert!(ScalarChannel::new(0.1, 0.5, None, EstimatorKind::Lasso).is_err());
        assert!(ScalarChannel::new(0.1, 0.5, Some(0.2), EstimatorKind::Mmse).is_err());
        assert!(ScalarChannel::new(0.1, 0.0, None, EstimatorKind::MatchedFilter).is_err());
        let c = ScalarChannel::matched_filter(0.1, 10.0, 1.0).unwrap();
        assert!((c.sigma2 - 0.11).abs() < 1e-15);
    }

    #[test]
    fn db_round_trip() {
        assert_eq!(db_to_linear(40.0), 1e4);
        assert!((linear_to_db(db_to_linear(13.7)) - 13.7).abs() < 1e-12);
    }
}
