//! Two-stage estimators: a scalar-channel estimate per vector followed by
//! joint thresholding of the summed squares.

use super::scalar::{lasso_state_evolution, mf_sigma2, MmseObjective};
use super::{check_diversity, check_kappa, check_snr, EstimatorKind};
use crate::error::{ensure, Error, Result};
use crate::search::bisect_boundary;
use crate::special::{xi, xi_upper};

/// Largest noise power at which joint thresholding reaches distortion α:
/// `σ²_J(α) = ξ_J(α) / (ξ_J(1 - ακ/(1-κ)) - ξ_J(α))`. The condition is
/// `σ² <= σ²_J(α)`.
pub fn sigma2_threshold(kappa: f64, diversity: u32, alpha: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_diversity(diversity)?;
    ensure(
        alpha >= 0.0 && alpha < 1.0 - kappa,
        "alpha",
        alpha,
        "0 <= alpha < 1 - kappa",
    )?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let low = xi(alpha, diversity)?;
    let high = xi_upper(alpha * kappa / (1.0 - kappa), diversity)?;
    Ok(low / (high - low))
}

const LAMBDA_POINTS: usize = 50;

fn log_space(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Smallest LASSO noise power over the penalty at per-vector rate `r`.
/// Returns `(σ², λ)`. Penalties whose state evolution fails are skipped.
pub fn lasso_best_sigma2(kappa: f64, snr: f64, r: f64) -> Result<(f64, f64)> {
    let s_mf = mf_sigma2(kappa, snr, r)?;
    let base = snr * s_mf.sqrt() * r / kappa;
    let mut first_err = None;
    let mut scan = |lo: f64, hi: f64| {
        let lambdas: Vec<f64> = log_space(lo, hi, LAMBDA_POINTS).collect();
        let mut best: Option<(usize, f64)> = None;
        for (i, &l) in lambdas.iter().enumerate() {
            match lasso_state_evolution(kappa, snr, r, l) {
                Ok(fp) => {
                    if best.is_none_or(|(_, s)| fp.sigma2 < s) {
                        best = Some((i, fp.sigma2));
                    }
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        best.map(|(i, s)| (lambdas, i, s))
    };
    let Some((grid, i, s)) = scan(base * 1e-4, base * 1e3) else {
        return Err(first_err.unwrap_or_else(|| Error::Invalid("empty penalty sweep".into())));
    };
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    match scan(lo, hi) {
        Some((fine, j, sf)) if sf < s => Ok((sf, fine[j])),
        _ => Ok((s, grid[i])),
    }
}

const RATE_BISECTIONS: usize = 25;
const RATE_CEILING: f64 = 1e6;

/// Smallest total rate at which the chosen estimator followed by joint
/// thresholding reaches distortion `alpha`.
pub fn two_stage_rate(kappa: f64, snr: f64, diversity: u32, alpha: f64, kind: EstimatorKind) -> Result<f64> {
    check_snr(snr)?;
    let target = sigma2_threshold(kappa, diversity, alpha)?;
    let jf = diversity as f64;
    let r_max = RATE_CEILING / jf;
    let unachievable = || Error::Unachievable(format!("no per-vector rate up to {r_max:e} reaches alpha = {alpha}"));
    if target == 0.0 {
        return Err(unachievable());
    }
    let r_mf = kappa * (1.0 + 1.0 / snr) / target;
    match kind {
        EstimatorKind::MatchedFilter => {
            if r_mf > r_max {
                return Err(unachievable());
            }
            Ok(jf * r_mf)
        }
        EstimatorKind::Mmse => {
            let obj = MmseObjective::new(kappa)?;
            let ok = |r: f64| -> Result<bool> { Ok(obj.minimize(snr, r)?.sigma2 <= target) };
            let hi = r_mf.min(r_max);
            if !ok(hi)? {
                return Err(unachievable());
            }
            let lo = hi * 1e-6;
            if ok(lo)? {
                return Ok(jf * lo);
            }
            let mut failure = None;
            let r = bisect_boundary(
                |r| match ok(r) {
                    Ok(b) => !b,
                    Err(e) => {
                        failure.get_or_insert(e);
                        true
                    }
                },
                lo,
                hi,
                RATE_BISECTIONS,
                true,
            );
            match failure {
                Some(e) => Err(e),
                None => Ok(jf * r),
            }
        }
        EstimatorKind::Lasso => {
            // a rate where every penalty fails counts as not achieved
            let ok = |r: f64| lasso_best_sigma2(kappa, snr, r).is_ok_and(|(s, _)| s <= target);
            // σ² >= κ/(r SNR) rules out anything below this rate
            let lo = kappa / (snr * target);
            let mut hi = r_mf.min(r_max).max(lo * 2.0);
            while !ok(hi) {
                if hi >= r_max {
                    return Err(unachievable());
                }
                hi = (hi * 2.0).min(r_max);
            }
            let r = bisect_boundary(|r| !ok(r), lo, hi, RATE_BISECTIONS, true);
            Ok(jf * r)
        }
    }
}

/// Distortion reached by the two-stage estimator at total rate `rho`:
/// the α at which `σ²_J(α)` equals the estimator's noise power, capped at
/// `1 - κ`.
pub fn two_stage_distortion(kappa: f64, snr: f64, diversity: u32, rho: f64, kind: EstimatorKind) -> Result<f64> {
    check_kappa(kappa)?;
    check_snr(snr)?;
    check_diversity(diversity)?;
    ensure(rho > 0.0 && rho.is_finite(), "rho", rho, "rho > 0")?;
    let r = rho / diversity as f64;
    let sigma2 = match kind {
        EstimatorKind::MatchedFilter => mf_sigma2(kappa, snr, r)?,
        EstimatorKind::Lasso => lasso_best_sigma2(kappa, snr, r)?.0,
        EstimatorKind::Mmse => MmseObjective::new(kappa)?.minimize(snr, r)?.sigma2,
    };
    Ok(alpha_for_sigma2(kappa, diversity, sigma2))
}

/// Inverse of [`sigma2_threshold`] in α, which increases from 0 to +inf on `[0, 1 - κ)`.
pub(crate) fn alpha_for_sigma2(kappa: f64, diversity: u32, sigma2: f64) -> f64 {
    let cap = 1.0 - kappa;
    bisect_boundary(
        |a| sigma2_threshold(kappa, diversity, a).is_ok_and(|s| s < sigma2),
        0.0,
        cap,
        60,
        false,
    )
    .min(cap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        let s = sigma2_threshold(0.1, 2, 0.1).unwrap();
        assert!((s - 0.023_975_818_572_346_15).abs() < 1e-12, "{s}");
        // ξ_2(p) = -ln(1 - p)
        let direct = -(0.9f64).ln() / (-(0.1f64 * 0.1 / 0.9).ln() + 0.9f64.ln());
        assert!((s - direct).abs() < 1e-12);
        assert_eq!(sigma2_threshold(0.1, 2, 0.0).unwrap(), 0.0);
        assert!(sigma2_threshold(0.1, 2, 1e-9).unwrap() < 1e-8);
        assert!(sigma2_threshold(0.1, 2, 0.9).is_err());
    }

    #[test]
    fn threshold_increasing() {
        let mut prev = 0.0;
        for i in 1..=100 {
            let s = sigma2_threshold(0.01, 4, 0.005 * i as f64).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn mf_rate_example() {
        let rho = two_stage_rate(0.1, 10.0, 2, 0.1, EstimatorKind::MatchedFilter).unwrap();
        assert!((rho - 9.175_9).abs() < 1e-3, "{rho}");
        let a = two_stage_distortion(0.1, 10.0, 2, rho, EstimatorKind::MatchedFilter).unwrap();
        assert!((a - 0.1).abs() < 1e-9, "{a}");
        assert!(two_stage_rate(0.1, 10.0, 2, 0.0, EstimatorKind::MatchedFilter).is_err());
    }

    #[test]
    fn mmse_rate_below_mf() {
        for &(k, snr) in &[(0.01, 100.0), (0.05, 1000.0)] {
            let mf = two_stage_rate(k, snr, 2, 0.1, EstimatorKind::MatchedFilter).unwrap();
            let mmse = two_stage_rate(k, snr, 2, 0.1, EstimatorKind::Mmse).unwrap();
            assert!(mmse <= mf * (1.0 + 1e-6), "{k} {snr}: {mmse} > {mf}");
        }
    }

    #[test]
    fn distortion_saturates() {
        let a = two_stage_distortion(0.1, 10.0, 1, 1e-6, EstimatorKind::MatchedFilter).unwrap();
        assert!(a <= 0.9 && a > 0.89);
    }
}
