//! Named invariants. Each check reduces to a nonnegative discrepancy that
//! must not exceed its tolerance; a check that errors counts as infinite.

use divsparse_core::bounds::{
    distortion_vs_rho, high_snr_envelopes, lasso_best_sigma2, lasso_state_evolution, lower_bound_rate, mf_sigma2,
    mmse_sigma2, ns_upper_bound_rate, sigma2_threshold, two_stage_rate, BoundSource,
};
use divsparse_core::info::{
    binary_entropy, conditional_entropy_power, conditional_entropy_power_by_quadrature, diversity_power,
    diversity_power_by_quadrature, entropy_rate, mixture_entropy, mutual_info_sparse_gaussian,
};
use divsparse_core::simulator::rng::Rng;
use divsparse_core::simulator::{
    amp_estimate, distortion, generate_instance, lasso_estimate, minimax_threshold, nearest_subspace_estimate,
    sigma2_from_median,
};
use divsparse_core::special::{
    adaptive_simpson, chi2_cdf, chi2_sf, gamma_p, gamma_q, integrate, log_gamma, normal_cdf, normal_quantile,
    normal_sf, xi, Domain, QuadratureRule, Tolerance,
};
use divsparse_core::EstimatorKind;
use std::f64::consts::{E, LN_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use crate::output::{num, write};
use crate::Failure;

type Result<T> = divsparse_core::Result<T>;
type Measure = fn() -> Result<f64>;

const CHECKS: &[(&str, f64, Measure)] = &[
    ("log_gamma_factorials", 1e-12, log_gamma_factorials),
    ("gamma_p_plus_q", 1e-14, gamma_p_plus_q),
    ("chi2_cdf_plus_sf", 1e-14, chi2_cdf_plus_sf),
    ("xi2_closed_form", 1e-12, xi2_closed_form),
    ("xi_round_trip", 1e-12, xi_round_trip),
    ("normal_cdf_plus_sf", 1e-15, normal_cdf_plus_sf),
    ("normal_quantile_round_trip", 1e-14, normal_quantile_round_trip),
    ("gauss_hermite_moments", 1e-12, gauss_hermite_moments),
    ("gauss_legendre_polynomial", 1e-13, gauss_legendre_polynomial),
    ("adaptive_simpson_exp", 1e-9, adaptive_simpson_exp),
    ("binary_entropy_half", 1e-15, binary_entropy_half),
    ("entropy_rate_saturation", 0.0, entropy_rate_saturation),
    ("diversity_power_quadrature", 1e-9, diversity_power_quadrature),
    ("diversity_power_at_one", 1e-12, diversity_power_at_one),
    ("entropy_power_quadrature", 1e-9, entropy_power_quadrature),
    ("mutual_info_vs_mixture_entropy", 1e-8, mutual_info_vs_mixture_entropy),
    ("ns_rate_nonincreasing_in_snr", 0.0, ns_rate_nonincreasing_in_snr),
    ("converse_below_achievability", 0.0, converse_below_achievability),
    ("envelopes_ordered", 0.0, envelopes_ordered),
    ("mf_sigma2_at_threshold", 1e-9, mf_sigma2_at_threshold),
    ("lasso_fixed_point_residuals", 1e-8, lasso_fixed_point_residuals),
    ("mmse_below_lasso", 1e-9, mmse_below_lasso),
    ("distortion_inverts_rate", 1e-6, distortion_inverts_rate),
    ("minimax_threshold_balance", 1e-9, minimax_threshold_balance),
    ("median_sigma2_round_trip", 1e-6, median_sigma2_round_trip),
    ("rng_reproducible", 0.0, rng_reproducible),
    ("distortion_exhaustive", 0.0, distortion_exhaustive),
    ("ns_noiseless_exact", 0.0, ns_noiseless_exact),
    ("lasso_kkt", 1e-6, lasso_kkt),
    ("amp_matches_lasso", 1e-4, amp_matches_lasso),
];

fn max_over<I: IntoIterator<Item = Result<f64>>>(values: I) -> Result<f64> {
    values.into_iter().try_fold(0.0_f64, |m, v| Ok(m.max(v?)))
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn log_gamma_factorials() -> Result<f64> {
    let mut fact = 1.0_f64;
    max_over((1..=25).map(|n| {
        if n > 1 {
            fact *= (n - 1) as f64;
        }
        Ok((log_gamma(n as f64)? - fact.ln()).abs() / fact.ln().max(1.0))
    }))
}

fn gamma_p_plus_q() -> Result<f64> {
    max_over([0.5, 1.0, 2.5, 10.0, 40.0].into_iter().flat_map(|a| {
        [0.1, 1.0, 5.0, 30.0, 80.0]
            .into_iter()
            .map(move |x| Ok((gamma_p(a, x)? + gamma_q(a, x)? - 1.0).abs()))
    }))
}

fn chi2_cdf_plus_sf() -> Result<f64> {
    max_over([1, 2, 3, 8, 18].into_iter().flat_map(|j| {
        [0.01, 0.5, 2.0, 10.0, 50.0]
            .into_iter()
            .map(move |t| Ok((chi2_cdf(t, j)? + chi2_sf(t, j)? - 1.0).abs()))
    }))
}

/// `ξ_2(β) = -ln(1 - β)`.
fn xi2_closed_form() -> Result<f64> {
    max_over(grid(0.001, 0.999, 999).map(|b| {
        let exact = -(-b).ln_1p();
        Ok((xi(b, 2)? - exact).abs() / exact)
    }))
}

fn xi_round_trip() -> Result<f64> {
    max_over(
        [1, 2, 4, 8, 16]
            .into_iter()
            .flat_map(|j| grid(0.01, 0.99, 99).map(move |p| Ok((chi2_cdf(j as f64 * xi(p, j)?, j)? - p).abs()))),
    )
}

fn normal_cdf_plus_sf() -> Result<f64> {
    max_over(grid(-8.0, 8.0, 161).map(|x| Ok((normal_cdf(x) + normal_sf(x) - 1.0).abs())))
}

fn normal_quantile_round_trip() -> Result<f64> {
    max_over(grid(0.001, 0.999, 999).map(|p| Ok((normal_cdf(normal_quantile(p)?) - p).abs() / p.min(1.0 - p))))
}

/// `E Z² = 1` and `E Z⁴ = 3` under the standard normal.
fn gauss_hermite_moments() -> Result<f64> {
    let rule = QuadratureRule::gauss_hermite(40)?;
    let m2 = integrate(|x| x * x, &rule, Domain::StandardNormal)?;
    let m4 = integrate(|x| x.powi(4), &rule, Domain::StandardNormal)?;
    Ok((m2 - 1.0).abs().max((m4 - 3.0).abs() / 3.0))
}

fn gauss_legendre_polynomial() -> Result<f64> {
    let rule = QuadratureRule::gauss_legendre(10)?;
    let v = integrate(|x| 5.0 * x.powi(8) - x.powi(3) + 1.0, &rule, Domain::Interval(0.0, 2.0))?;
    let exact = 5.0 * 512.0 / 9.0 - 4.0 + 2.0;
    Ok((v - exact).abs() / exact)
}

fn adaptive_simpson_exp() -> Result<f64> {
    let v = adaptive_simpson(f64::exp, 0.0, 1.0, Tolerance::default())?;
    Ok((v - (E - 1.0)).abs() / (E - 1.0))
}

fn binary_entropy_half() -> Result<f64> {
    Ok((binary_entropy(0.5)? - LN_2).abs())
}

/// `R(κ, α) = 0` once `α >= 1 - κ`.
fn entropy_rate_saturation() -> Result<f64> {
    max_over([0.01, 0.1, 0.3].into_iter().map(|k| entropy_rate(k, 1.0 - k)))
}

fn diversity_power_quadrature() -> Result<f64> {
    max_over([1, 2, 4, 16].into_iter().flat_map(|j| {
        [0.01, 0.1, 0.5, 0.9].into_iter().map(move |b| {
            let p = diversity_power(b, j)?;
            Ok((p - diversity_power_by_quadrature(b, j)?).abs() / p)
        })
    }))
}

/// `P_J(1) = E χ²_J / J = 1`.
fn diversity_power_at_one() -> Result<f64> {
    max_over(
        [1, 2, 4, 16]
            .into_iter()
            .map(|j| Ok((diversity_power(1.0 - 1e-15, j)? - 1.0).abs())),
    )
}

fn entropy_power_quadrature() -> Result<f64> {
    max_over([0.01, 0.1, 0.5, 0.9].into_iter().map(|b| {
        let n = conditional_entropy_power(b)?;
        Ok((n - conditional_entropy_power_by_quadrature(b)?).abs() / n)
    }))
}

/// `I = h(Y) - ½ ln(2πeσ²)`.
fn mutual_info_vs_mixture_entropy() -> Result<f64> {
    max_over([(0.1, 0.5), (0.01, 0.1), (0.3, 2.0)].into_iter().map(|(k, s2)| {
        let direct = mixture_entropy(k, s2)? - 0.5 * (2.0 * PI * E * s2).ln();
        Ok((mutual_info_sparse_gaussian(k, s2)? - direct).abs())
    }))
}

fn snr_grid() -> impl Iterator<Item = f64> {
    grid(0.0, 60.0, 13).map(|db| 10f64.powf(db / 10.0))
}

fn ns_rate_nonincreasing_in_snr() -> Result<f64> {
    max_over([1, 4].into_iter().map(|j| {
        let rates: Vec<f64> = snr_grid()
            .map(|s| ns_upper_bound_rate(1e-3, s, j, 0.1))
            .collect::<Result<_>>()?;
        Ok(rates.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max))
    }))
}

fn converse_below_achievability() -> Result<f64> {
    max_over([1, 4].into_iter().flat_map(|j| {
        snr_grid()
            .map(move |s| Ok((lower_bound_rate(1e-3, s, j, 0.1)? - ns_upper_bound_rate(1e-3, s, j, 0.1)?).max(0.0)))
    }))
}

fn envelopes_ordered() -> Result<f64> {
    max_over([1, 4, 16].into_iter().map(|j| {
        let e = high_snr_envelopes(1e-4, j, 0.1, 1e6)?;
        Ok((e.lower - e.upper).max(0.0))
    }))
}

/// At the matched-filter rate the predicted noise power equals the
/// thresholding limit.
fn mf_sigma2_at_threshold() -> Result<f64> {
    max_over([1, 4].into_iter().map(|j| {
        let (k, snr, a) = (0.01, 100.0, 0.1);
        let rho = two_stage_rate(k, snr, j, a, EstimatorKind::MatchedFilter)?;
        let limit = sigma2_threshold(k, j, a)?;
        Ok((mf_sigma2(k, snr, rho / j as f64)? - limit).abs() / limit)
    }))
}

fn lasso_fixed_point_residuals() -> Result<f64> {
    let f = lasso_state_evolution(0.05, 100.0, 0.5, 0.2)?;
    Ok(f.residuals.0.abs().max(f.residuals.1.abs()))
}

fn mmse_below_lasso() -> Result<f64> {
    max_over([0.3, 1.0].into_iter().map(|r| {
        let mmse = mmse_sigma2(0.05, 100.0, r)?.sigma2;
        let (lasso, _) = lasso_best_sigma2(0.05, 100.0, r)?;
        Ok(((mmse - lasso) / lasso).max(0.0))
    }))
}

/// The rate is nearly flat in α, so the inverse is checked on the rate side.
fn distortion_inverts_rate() -> Result<f64> {
    let (k, snr, j) = (1e-3, 1e4, 2);
    let rho = ns_upper_bound_rate(k, snr, j, 0.05)?;
    let a = distortion_vs_rho(BoundSource::Thm1, None, k, snr, j, rho)?;
    Ok((ns_upper_bound_rate(k, snr, j, a)? - rho).abs() / rho)
}

/// `G(t / (1 + σ²)) = ((1 - κ) / κ) Q(t / σ²)` at the minimax threshold.
fn minimax_threshold_balance() -> Result<f64> {
    let (s2, k, j) = (0.04, 0.05, 4);
    let t = minimax_threshold(s2, k, j)?;
    let lhs = chi2_cdf(t / (1.0 + s2), j)?;
    let rhs = (1.0 - k) / k * chi2_sf(t / s2, j)?;
    Ok((lhs - rhs).abs() / lhs.max(rhs))
}

/// The median of the mixture statistic maps back to the σ² that produced it.
fn median_sigma2_round_trip() -> Result<f64> {
    let (s2, k, j) = (0.2, 0.05, 2);
    let mass = |m: f64| -> Result<f64> { Ok((1.0 - k) * chi2_cdf(m / s2, j)? + k * chi2_cdf(m / (1.0 + s2), j)?) };
    let (mut lo, mut hi) = (1e-6, 100.0_f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mass(mid)? < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((sigma2_from_median(lo, k, j)? - s2).abs() / s2)
}

fn rng_reproducible() -> Result<f64> {
    let draw = |seed| {
        let mut r = Rng::new(seed);
        (0..1000).map(|_| r.normal()).collect::<Vec<_>>()
    };
    Ok(if draw(42) == draw(42) && draw(42) != draw(43) {
        0.0
    } else {
        1.0
    })
}

/// Distortion against brute force over every subset of an 8-set.
fn distortion_exhaustive() -> Result<f64> {
    let truth = [1, 4, 6];
    let mut worst = 0.0_f64;
    for mask in 0u32..256 {
        let est: Vec<usize> = (0..8).filter(|i| mask >> i & 1 == 1).collect();
        let missed = truth.iter().filter(|t| !est.contains(t)).count();
        let extra = est.iter().filter(|e| !truth.contains(e)).count();
        let expect = missed.max(extra) as f64 / truth.len() as f64;
        worst = worst.max((distortion(&truth, &est, truth.len())? - expect).abs());
    }
    Ok(worst)
}

fn ns_noiseless_exact() -> Result<f64> {
    max_over((0..5).map(|seed| Ok(nearest_subspace_estimate(&generate_instance(12, 2, 2, 6, 1e12, seed)?)?.distortion)))
}

fn lasso_kkt() -> Result<f64> {
    let inst = generate_instance(200, 10, 1, 100, 100.0, 3)?;
    Ok(lasso_estimate(&inst, 20.0, 0)?.kkt_residual / 21.0)
}

fn amp_matches_lasso() -> Result<f64> {
    let inst = generate_instance(400, 20, 1, 200, 100.0, 4)?;
    let cd = lasso_estimate(&inst, 35.0, 0)?.x;
    let amp = amp_estimate(&inst, 35.0, 0)?.estimate;
    Ok((&cd - &amp).norm() / cd.norm())
}

pub fn run(overrides: &[String], out: Option<&Path>) -> std::result::Result<(), Failure> {
    let mut tolerances: Vec<(&str, f64)> = CHECKS.iter().map(|&(n, t, _)| (n, t)).collect();
    for o in overrides {
        let (name, value) = o
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--tol expects name=value, got `{o}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| Failure::Usage(format!("bad tolerance `{value}` for {name}")))?;
        let slot = tolerances
            .iter_mut()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Failure::Usage(format!("no check named `{name}`")))?;
        slot.1 = value;
    }
    let width = CHECKS.iter().map(|c| c.0.len()).max().unwrap_or(0);
    let mut csv = String::from("check,measured,tolerance,status\n");
    let mut failed = 0;
    for (&(name, _, measure), &(_, tol)) in CHECKS.iter().zip(&tolerances) {
        let measured = measure().unwrap_or(f64::INFINITY);
        let pass = measured <= tol;
        failed += usize::from(!pass);
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{name:<width$}  {measured:>10.3e}  <= {tol:>9.1e}  {status}");
        let _ = writeln!(csv, "{name},{},{},{status}", num(measured), num(tol));
    }
    println!("{} of {} checks passed", CHECKS.len() - failed, CHECKS.len());
    if let Some(dir) = out {
        write(&dir.join("selfcheck.csv"), &csv)?;
    }
    if failed > 0 {
        return Err(Failure::Numeric(format!("{failed} checks failed")));
    }
    Ok(())
}
