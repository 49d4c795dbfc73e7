//! Effective noise powers of the matched filter, LASSO and MMSE estimators,
//! each seen as the scalar channel `X + σW` with `X ~ κ N(0,1) + (1-κ) δ_0`.

use super::{check_rate, check_snr};
use crate::error::{ensure, Error, Result};
use crate::info::mutual_info_sparse_gaussian;
use crate::search::golden_max;
use crate::special::{normal_pdf, normal_quantile, normal_sf};

/// `σ² = (κ / r)(1/SNR + 1)`. An infinite SNR gives the noiseless `κ / r`.
pub fn mf_sigma2(kappa: f64, snr: f64, r: f64) -> Result<f64> {
    ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
    check_snr(snr)?;
    check_rate(r)?;
    Ok(kappa / r * (1.0 / snr + 1.0))
}

fn check_prior(kappa: f64, sigma2: f64, t: f64) -> Result<()> {
    ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
    ensure(sigma2 > 0.0 && sigma2.is_finite(), "sigma2", sigma2, "sigma2 > 0")?;
    ensure(t >= 0.0 && t.is_finite(), "t", t, "t >= 0")
}

/// `E|X - η_t(X + σW)|²` for the soft threshold `η_t`, in closed form.
pub fn lasso_mse(kappa: f64, sigma2: f64, t: f64) -> Result<f64> {
    check_prior(kappa, sigma2, t)?;
    let sigma = sigma2.sqrt();
    let s2 = 1.0 + sigma2;
    let s = s2.sqrt();

    // X = 0: E η_t(σW)²
    let tau = t / sigma;
    let null = 2.0 * sigma2 * ((1.0 + tau * tau) * normal_sf(tau) - tau * normal_pdf(tau));

    // X ~ N(0,1): X | Y has mean Y/s² and variance σ²/s², with Y = sZ
    let tp = t / s;
    let (q, phi) = (normal_sf(tp), normal_pdf(tp));
    let a = sigma2 / s;
    let inside = (1.0 - 2.0 * q - 2.0 * tp * phi) / s2;
    let outside = 2.0 * (t * t * q - 2.0 * t * a * phi + a * a * (tp * phi + q));
    let active = sigma2 / s2 + inside + outside;

    Ok((1.0 - kappa) * null + kappa * active)
}

/// `P[|X + σW| > t]`.
pub fn lasso_active_prob(kappa: f64, sigma2: f64, t: f64) -> Result<f64> {
    check_prior(kappa, sigma2, t)?;
    let null = 2.0 * normal_sf(t / sigma2.sqrt());
    let active = 2.0 * normal_sf(t / (1.0 + sigma2).sqrt());
    Ok((1.0 - kappa) * null + kappa * active)
}

/// Solution of the LASSO state-evolution fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFixedPoint {
    pub sigma2: f64,
    pub t: f64,
    pub iterations: usize,
    /// Set when the three starting points reached fixed points whose σ²
    /// differ by more than 1e-6 relative.
    pub multiple_fixed_points: bool,
    /// Residuals of the two fixed-point equations at the returned pair.
    pub residuals: (f64, f64),
}

const SE_MAX_ITER: usize = 10_000;
const SE_DAMPING: f64 = 0.5;
const SE_RTOL: f64 = 1e-9;
const SE_TAIL: usize = 16;

/// Right-hand sides of the two fixed-point equations.
fn se_map(kappa: f64, snr: f64, r: f64, lambda: f64, sigma2: f64, t: f64) -> Result<(f64, f64)> {
    let mse = lasso_mse(kappa, sigma2, t)?;
    let p = lasso_active_prob(kappa, sigma2, t)?;
    Ok(((kappa / snr + mse) / r, (kappa * lambda / snr + t * p) / r))
}

fn se_iterate(kappa: f64, snr: f64, r: f64, lambda: f64, mut sigma2: f64, mut t: f64) -> Result<(f64, f64, usize)> {
    let mut tail = std::collections::VecDeque::with_capacity(SE_TAIL);
    for it in 1..=SE_MAX_ITER {
        let (ns, nt) = se_map(kappa, snr, r, lambda, sigma2, t)?;
        let ns = SE_DAMPING * sigma2 + (1.0 - SE_DAMPING) * ns;
        let nt = SE_DAMPING * t + (1.0 - SE_DAMPING) * nt;
        if !(ns.is_finite() && nt.is_finite()) || ns > 1e12 {
            return Err(Error::Divergence {
                what: "LASSO state evolution",
                detail: format!("sigma2 = {ns:e}, t = {nt:e} after {it} iterations"),
            });
        }
        let done = (ns - sigma2).abs() <= SE_RTOL * ns && (nt - t).abs() <= SE_RTOL * nt + 1e-15;
        sigma2 = ns;
        t = nt;
        if done {
            return Ok((sigma2, t, it));
        }
        if tail.len() == SE_TAIL {
            tail.pop_front();
        }
        tail.push_back((sigma2, t));
    }
    Err(Error::NonConvergence {
        what: "LASSO state evolution",
        iterations: SE_MAX_ITER,
        trajectory: tail.into_iter().collect(),
    })
}

/// Joint fixed point `(σ², t)` of the LASSO state evolution at per-vector
/// rate `r` and penalty `lambda`, by damped iteration.
///
/// Three starting points are used: the matched-filter pair
/// `(σ²_MF, σ_MF Φ⁻¹(1 - κ/2))` and two scaled copies. The smallest σ² is
/// returned.
pub fn lasso_state_evolution(kappa: f64, snr: f64, r: f64, lambda: f64) -> Result<LassoFixedPoint> {
    ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
    check_snr(snr)?;
    check_rate(r)?;
    ensure(lambda >= 0.0 && lambda.is_finite(), "lambda", lambda, "lambda >= 0")?;
    let s0 = mf_sigma2(kappa, snr, r)?;
    let t0 = s0.sqrt() * normal_quantile(1.0 - kappa / 2.0)?;
    let starts = [(s0, t0), (10.0 * s0, 3.0 * t0), (0.1 * s0, t0 / 3.0)];
    let mut found: Vec<(f64, f64, usize)> = Vec::new();
    let mut first_err = None;
    for (s, t) in starts {
        match se_iterate(kappa, snr, r, lambda, s, t) {
            Ok(v) => found.push(v),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if found.is_empty() {
        return Err(first_err.expect("every start failed"));
    }
    let (lo, hi) = found
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.0), hi.max(v.0)));
    let &(sigma2, t, _) = found.iter().min_by(|a, b| a.0.total_cmp(&b.0)).expect("nonempty");
    let iterations = found.iter().map(|v| v.2).sum();
    let (fs, ft) = se_map(kappa, snr, r, lambda, sigma2, t)?;
    Ok(LassoFixedPoint {
        sigma2,
        t,
        iterations,
        multiple_fixed_points: hi - lo > 1e-6 * lo,
        residuals: (fs - sigma2, ft - t),
    })
}

/// Cached information curve behind the replica MMSE objective
/// `r ln σ² + κ / (SNR σ²) + 2 I(X; X + σW)`, reusable across `(snr, r)`.
#[derive(Debug, Clone)]
pub struct MmseObjective {
    kappa: f64,
    ln_grid: Vec<f64>,
    info: Vec<f64>,
}

/// Minimizer of the replica objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseSolution {
    pub sigma2: f64,
    pub objective: f64,
    /// Set when the grid shows more than one local minimum.
    pub multiple_minima: bool,
}

const MMSE_GRID: usize = 400;
const MMSE_LN_LO: f64 = -18.420_680_743_952_367; // ln 1e-8
const MMSE_LN_HI: f64 = 6.907_755_278_982_137; // ln 1e3

impl MmseObjective {
    pub fn new(kappa: f64) -> Result<Self> {
        ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
        let step = (MMSE_LN_HI - MMSE_LN_LO) / (MMSE_GRID - 1) as f64;
        let ln_grid: Vec<f64> = (0..MMSE_GRID).map(|i| MMSE_LN_LO + step * i as f64).collect();
        let info = ln_grid
            .iter()
            .map(|&l| mutual_info_sparse_gaussian(kappa, l.exp()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kappa, ln_grid, info })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The 400 grid abscissae `ln σ²` and objective values at `(snr, r)`.
    pub fn grid_values(&self, snr: f64, r: f64) -> Vec<(f64, f64)> {
        self.ln_grid
            .iter()
            .zip(&self.info)
            .map(|(&l, &i)| (l, self.combine(snr, r, l, i)))
            .collect()
    }

    fn combine(&self, snr: f64, r: f64, ln_s2: f64, info: f64) -> f64 {
        r * ln_s2 + self.kappa / snr * (-ln_s2).exp() + 2.0 * info
    }

    /// Objective at an arbitrary σ².
    pub fn value(&self, snr: f64, r: f64, sigma2: f64) -> Result<f64> {
        let l = sigma2.ln();
        Ok(self.combine(snr, r, l, mutual_info_sparse_gaussian(self.kappa, sigma2)?))
    }

    pub fn minimize(&self, snr: f64, r: f64) -> Result<MmseSolution> {
        check_snr(snr)?;
        check_rate(r)?;
        let vals = self.grid_values(snr, r);
        let n = vals.len();
        let (mut best_i, mut best_v) = (0, f64::INFINITY);
        let mut local_minima = 0;
        for i in 0..n {
            let v = vals[i].1;
            if v < best_v {
                best_v = v;
                best_i = i;
            }
            let left = i == 0 || vals[i - 1].1 > v;
            let right = i + 1 == n || vals[i + 1].1 >= v;
            if left && right {
                local_minima += 1;
            }
        }
        let a = self.ln_grid[best_i.saturating_sub(1)];
        let b = self.ln_grid[(best_i + 1).min(n - 1)];
        let mut failure = None;
        let (ln_s2, neg) = golden_max(
            |l| match mutual_info_sparse_gaussian(self.kappa, l.exp()) {
                Ok(i) => -self.combine(snr, r, l, i),
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NEG_INFINITY
                }
            },
            a,
            b,
            1e-8,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let (ln_s2, objective) = if -neg <= best_v {
            (ln_s2, -neg)
        } else {
            (vals[best_i].0, best_v)
        };
        Ok(MmseSolution {
            sigma2: ln_s2.exp(),
            objective,
            multiple_minima: local_minima > 1,
        })
    }
}

/// Replica MMSE noise power at per-vector rate `r`.
pub fn mmse_sigma2(kappa: f64, snr: f64, r: f64) -> Result<MmseSolution> {
    MmseObjective::new(kappa)?.minimize(snr, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{adaptive_simpson, integrate, Domain, QuadratureRule, Tolerance};

    #[test]
    fn mf_examples() {
        assert!((mf_sigma2(0.1, 10.0, 1.0).unwrap() - 0.11).abs() < 1e-15);
        assert!((mf_sigma2(0.2, 1.0, 0.5).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(mf_sigma2(0.3, f64::INFINITY, 2.0).unwrap(), 0.15);
        assert!(mf_sigma2(0.1, 1.0, 0.0).is_err());
    }

    fn soft(y: f64, t: f64) -> f64 {
        if y > t {
            y - t
        } else if y < -t {
            y + t
        } else {
            0.0
        }
    }

    #[test]
    fn closed_forms_match_quadrature() {
        let rule = QuadratureRule::adaptive_simpson();
        for &(k, s2, t) in &[(0.1, 0.5, 0.3), (0.05, 0.01, 0.2), (0.3, 2.0, 0.0), (0.2, 0.1, 1.5)] {
            let sigma = f64::sqrt(s2);
            let s = f64::sqrt(1.0 + s2);
            let null_mse = integrate(|u| soft(sigma * u, t).powi(2), &rule, Domain::StandardNormal).unwrap();
            // active: Y = sZ, X | Y ~ N(Y/s², σ²/s²)
            let act_mse = integrate(
                |u| {
                    let y = s * u;
                    s2 / (1.0 + s2) + (y / (1.0 + s2) - soft(y, t)).powi(2)
                },
                &rule,
                Domain::StandardNormal,
            )
            .unwrap();
            let mse = (1.0 - k) * null_mse + k * act_mse;
            assert!((lasso_mse(k, s2, t).unwrap() - mse).abs() < 1e-8, "{k} {s2} {t}");
            // tail masses, split at the jump of the indicator
            let tail = |c: f64| {
                if c >= 40.0 {
                    return 0.0;
                }
                2.0 * adaptive_simpson(normal_pdf, c, 40.0, Tolerance::default()).unwrap()
            };
            let (p0, p1) = (tail(t / sigma), tail(t / s));
            let p = (1.0 - k) * p0 + k * p1;
            assert!((lasso_active_prob(k, s2, t).unwrap() - p).abs() < 1e-10, "{k} {s2} {t}");
        }
    }

    #[test]
    fn lasso_zero_penalty_closed_form() {
        let fp = lasso_state_evolution(0.1, 10.0, 2.0, 0.0).unwrap();
        assert!((fp.sigma2 - 0.01).abs() < 1e-9, "{fp:?}");
        assert!(fp.t.abs() < 1e-9);
    }

    #[test]
    fn lasso_golden() {
        // independent fixed-point script at tolerance 1e-12
        let fp = lasso_state_evolution(0.1, 100.0, 0.5, 0.01).unwrap();
        assert!((fp.sigma2 / 0.007_862_613_592_481_119 - 1.0).abs() < 1e-6, "{fp:?}");
        assert!((fp.t / 0.066_956_076_831_824_28 - 1.0).abs() < 1e-6, "{fp:?}");
        assert!(fp.residuals.0.abs() < 1e-8 && fp.residuals.1.abs() < 1e-8);
        assert!(!fp.multiple_fixed_points);
    }

    #[test]
    fn lasso_sigma2_floor() {
        for &(k, snr, r, l) in &[
            (0.05, 10.0, 0.3, 0.1),
            (0.2, 1000.0, 0.8, 1.0),
            (0.01, 100.0, 0.1, 0.001),
        ] {
            let fp = lasso_state_evolution(k, snr, r, l).unwrap();
            assert!(fp.sigma2 >= k / (r * snr));
        }
    }

    #[test]
    fn mmse_kappa_one_matches_quadratic() {
        // stationarity of r ln s + 1/(SNR s) + ln(1 + 1/s)
        for &(snr, r) in &[(10.0, 0.5), (100.0, 2.0), (1.0, 1.0)] {
            let sol = mmse_sigma2(1.0, snr, r).unwrap();
            let b = r - 1.0 - 1.0 / snr;
            let s = (-b + (b * b + 4.0 * r / snr).sqrt()) / (2.0 * r);
            assert!((sol.sigma2 / s - 1.0).abs() < 1e-6, "{snr} {r}: {} vs {s}", sol.sigma2);
        }
    }

    #[test]
    fn mmse_golden_and_grid_dominance() {
        let obj = MmseObjective::new(0.1).unwrap();
        let sol = obj.minimize(100.0, 0.5).unwrap();
        // brute-force grid of 1e6 points
        assert!((sol.sigma2 / 0.002_840_508_995_928_895_6 - 1.0).abs() < 1e-5, "{sol:?}");
        assert!(!sol.multiple_minima);
        for (_, v) in obj.grid_values(100.0, 0.5) {
            assert!(sol.objective <= v + 1e-12);
        }
        assert!(sol.sigma2 <= mf_sigma2(0.1, 100.0, 0.5).unwrap());
    }
}
