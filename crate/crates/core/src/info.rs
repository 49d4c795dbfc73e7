//! Information quantities of the sparse Gaussian model, in nats.

use crate::error::{ensure, Result};
use crate::special::{adaptive_simpson, adaptive_simpson_split, chi2_cdf, normal_pdf, xi, xi_upper, Tolerance};
use std::f64::consts::{E, PI};

/// Sparsity rate, distortion, analysis fraction and diversity, validated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityParams {
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub diversity: u32,
}

impl SparsityParams {
    pub fn new(kappa: f64, alpha: f64, beta: f64, diversity: u32) -> Result<Self> {
        ensure(kappa > 0.0 && kappa < 0.5, "kappa", kappa, "0 < kappa < 1/2")?;
        ensure((0.0..=1.0).contains(&alpha), "alpha", alpha, "0 <= alpha <= 1")?;
        ensure((0.0..=1.0).contains(&beta), "beta", beta, "0 <= beta <= 1")?;
        ensure(diversity >= 1, "J", diversity as f64, "J >= 1")?;
        Ok(Self {
            kappa,
            alpha,
            beta,
            diversity,
        })
    }

    pub fn entropy_rate(&self) -> Result<f64> {
        entropy_rate(self.kappa, self.alpha)
    }

    pub fn diversity_power(&self) -> Result<f64> {
        diversity_power(self.beta, self.diversity)
    }
}

/// `H_b(p) = -p ln p - (1 - p) ln(1 - p)` with `0 ln 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    ensure((0.0..=1.0).contains(&p), "p", p, "0 <= p <= 1")?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.ln() - (1.0 - p) * (-p).ln_1p())
}

/// Metric entropy rate `R(κ, α)` of a κ-sparse pattern at distortion α.
/// Zero once `α >= 1 - κ`.
pub fn entropy_rate(kappa: f64, alpha: f64) -> Result<f64> {
    ensure(kappa > 0.0 && kappa < 0.5, "kappa", kappa, "0 < kappa < 1/2")?;
    ensure(alpha >= 0.0, "alpha", alpha, "alpha >= 0")?;
    if alpha >= 1.0 - kappa {
        return Ok(0.0);
    }
    let r = binary_entropy(kappa)?
        - kappa * binary_entropy(alpha)?
        - (1.0 - kappa) * binary_entropy(kappa * alpha / (1.0 - kappa))?;
    Ok(r.max(0.0))
}

/// Diversity power `P_J(β) = ∫_0^β ξ_J(p) dp`.
///
/// Uses the truncated-mean identity
/// `E[χ²_J / J ; χ²_J / J <= ξ_J(β)] = P[χ²_{J+2} <= J ξ_J(β)]`.
pub fn diversity_power(beta: f64, diversity: u32) -> Result<f64> {
    ensure((0.0..=1.0).contains(&beta), "beta", beta, "0 <= beta <= 1")?;
    ensure(diversity >= 1, "J", diversity as f64, "J >= 1")?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    if beta == 1.0 {
        return Ok(1.0);
    }
    let q = xi(beta, diversity)?;
    chi2_cdf(diversity as f64 * q, diversity + 2)
}

/// Direct quadrature of `∫_0^β ξ_J(p) dp`, independent of the chi-square
/// identity. Below `p = 1/2` the substitution `p = u^J / 2` removes the
/// `p^{2/J}` behaviour at the origin; above it `p = 1 - e^{-s}` absorbs
/// the logarithmic growth near one.
pub fn diversity_power_by_quadrature(beta: f64, diversity: u32) -> Result<f64> {
    ensure((0.0..=1.0).contains(&beta), "beta", beta, "0 <= beta <= 1")?;
    ensure(diversity >= 1, "J", diversity as f64, "J >= 1")?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    let j = diversity as f64;
    let tol = Tolerance { rel: 1e-11, abs: 1e-15 };
    let lower_end = beta.min(0.5);
    let u_max = (2.0 * lower_end).powf(1.0 / j);
    let low = adaptive_simpson(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let p = 0.5 * u.powi(diversity as i32);
            let dp = 0.5 * j * u.powi(diversity as i32 - 1);
            xi(p, diversity).unwrap_or(f64::NAN) * dp
        },
        0.0,
        u_max,
        tol,
    )?;
    if beta <= 0.5 {
        return Ok(low);
    }
    let s_max = if beta == 1.0 { 80.0 } else { -(-beta).ln_1p() };
    let mut breaks = vec![std::f64::consts::LN_2];
    breaks.extend([4.0, 16.0].into_iter().filter(|&b| b < s_max));
    breaks.push(s_max);
    let high = adaptive_simpson_split(
        |s: f64| {
            let q = (-s).exp();
            xi_upper(q, diversity).unwrap_or(f64::NAN) * q
        },
        &breaks,
        tol,
    )?;
    Ok(low + high)
}

/// Conditional entropy power `𝒩(β)` of `U | U² <= ξ_1(β)` for standard normal `U`.
///
/// The truncation is symmetric on `[-a, a]` with mass β, whose entropy is
/// `ln β + ½ ln(2π) + ½ - a φ(a) / β`; the entropy power is then
/// `β² exp(-2 a φ(a) / β)`, equal to one for the untruncated normal.
pub fn conditional_entropy_power(beta: f64) -> Result<f64> {
    ensure(beta > 0.0 && beta <= 1.0, "beta", beta, "0 < beta <= 1")?;
    if beta == 1.0 {
        return Ok(1.0);
    }
    let a = xi(beta, 1)?.sqrt();
    Ok(beta * beta * (-2.0 * a * normal_pdf(a) / beta).exp())
}

/// Differential entropy of the truncated normal by quadrature of `-∫ f ln f`.
pub fn truncated_normal_entropy_by_quadrature(beta: f64) -> Result<f64> {
    ensure(beta > 0.0 && beta <= 1.0, "beta", beta, "0 < beta <= 1")?;
    let a = if beta == 1.0 { 40.0 } else { xi(beta, 1)?.sqrt() };
    let c = 0.5 * (2.0 * PI).ln() + beta.ln();
    let half = adaptive_simpson(
        |u: f64| normal_pdf(u) / beta * (0.5 * u * u + c),
        0.0,
        a,
        Tolerance {
            rel: 1e-13,
            abs: 1e-300,
        },
    )?;
    Ok(2.0 * half)
}

/// [`conditional_entropy_power`] evaluated through the quadrature entropy.
pub fn conditional_entropy_power_by_quadrature(beta: f64) -> Result<f64> {
    let h = truncated_normal_entropy_by_quadrature(beta)?;
    Ok((2.0 * h).exp() / (2.0 * PI * E))
}

struct Mixture {
    kappa: f64,
    s0: f64,
    s1: f64,
    // lr(y) = lr0 + curvature * y^2
    lr0: f64,
    curvature: f64,
}

impl Mixture {
    fn new(kappa: f64, sigma2: f64) -> Self {
        let s0 = sigma2.sqrt();
        let s1 = (1.0 + sigma2).sqrt();
        Self {
            kappa,
            s0,
            s1,
            lr0: (s0 / s1).ln(),
            curvature: 0.5 * (1.0 / sigma2 - 1.0 / (1.0 + sigma2)),
        }
    }

    /// log-likelihood ratio of the active component against the null one
    fn lr(&self, y: f64) -> f64 {
        self.lr0 + self.curvature * y * y
    }

    /// `ln(p(y) / φ_{s0}(y))` for the mixture density `p`
    fn log_ratio_to_null(&self, lr: f64) -> f64 {
        let k = self.kappa;
        if lr < self.switch() {
            (k * lr.exp_m1()).ln_1p()
        } else {
            lr + k.ln() + ((1.0 - k) / k * (-lr).exp()).ln_1p()
        }
    }

    /// `ln(φ_{s1}(y) / p(y))`, the active-component log ratio
    fn log_ratio_active(&self, lr: f64) -> f64 {
        let k = self.kappa;
        if lr < self.switch() {
            lr - (k * lr.exp_m1()).ln_1p()
        } else {
            -k.ln() - ((1.0 - k) / k * (-lr).exp()).ln_1p()
        }
    }

    /// value of `lr` where the weighted components are equal
    fn switch(&self) -> f64 {
        ((1.0 - self.kappa) / self.kappa).ln()
    }

    /// |y| at which the two weighted components cross
    fn crossing(&self) -> Option<f64> {
        let k = self.kappa;
        if k >= 1.0 {
            return None;
        }
        let y2 = (self.switch() - self.lr0) / self.curvature;
        (y2 > 0.0).then(|| y2.sqrt())
    }

    fn breaks(&self, scale: f64) -> Vec<f64> {
        let mut b = vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0];
        if let Some(y) = self.crossing() {
            let u = y / scale;
            if u < 40.0 {
                b.push(u);
            }
        }
        b.sort_by(|x, y| x.total_cmp(y));
        b.dedup();
        b
    }
}

/// `I(X; X + σW)` for `X ~ κ N(0, 1) + (1 - κ) δ_0`, `σ² = sigma2`.
///
/// Split by the chain rule over the support indicator `B`:
/// `I(X; Y) = I(B; Y) + κ ½ ln(1 + 1/σ²)`, where `I(B; Y)` is the κ-weighted
/// sum of the two component divergences from the output mixture, each a
/// Gaussian expectation with a nonnegative integrand. This is algebraically
/// `h(Y) - ½ ln(2πeσ²)` (see [`mixture_entropy`]) but keeps full relative
/// accuracy when the information is tiny.
pub fn mutual_info_sparse_gaussian(kappa: f64, sigma2: f64) -> Result<f64> {
    ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
    ensure(sigma2 > 0.0 && sigma2.is_finite(), "sigma2", sigma2, "sigma2 > 0")?;
    if kappa == 1.0 {
        return Ok(0.5 * (1.0 / sigma2).ln_1p());
    }
    let mix = Mixture::new(kappa, sigma2);
    // the log ratios carry rounding of order EPS |ln κ|, which bounds the
    // attainable absolute accuracy when the two components nearly coincide
    let noise = 32.0 * f64::EPSILON * (1.0 + mix.switch().abs());
    let tol = Tolerance { rel: 1e-10, abs: noise };
    let active = adaptive_simpson_split(
        |u: f64| mix.log_ratio_active(mix.lr(mix.s1 * u)) * normal_pdf(u),
        &mix.breaks(mix.s1),
        tol,
    )?;
    let null = adaptive_simpson_split(
        |u: f64| -mix.log_ratio_to_null(mix.lr(mix.s0 * u)) * normal_pdf(u),
        &mix.breaks(mix.s0),
        tol,
    )?;
    let support_info = (2.0 * (kappa * active + (1.0 - kappa) * null)).max(0.0);
    Ok(support_info + 0.5 * kappa * (1.0 / sigma2).ln_1p())
}

/// Differential entropy `h(Y)` of the output mixture
/// `κ N(0, 1 + σ²) + (1 - κ) N(0, σ²)`, by direct quadrature of `-∫ p ln p`.
pub fn mixture_entropy(kappa: f64, sigma2: f64) -> Result<f64> {
    ensure(kappa > 0.0 && kappa <= 1.0, "kappa", kappa, "0 < kappa <= 1")?;
    ensure(sigma2 > 0.0 && sigma2.is_finite(), "sigma2", sigma2, "sigma2 > 0")?;
    let mix = Mixture::new(kappa, sigma2);
    let ln_null = |y: f64| -0.5 * y * y / sigma2 - mix.s0.ln() - 0.5 * (2.0 * PI).ln();
    let density = |y: f64| kappa * normal_pdf(y / mix.s1) / mix.s1 + (1.0 - kappa) * normal_pdf(y / mix.s0) / mix.s0;
    let mut breaks = vec![0.0, mix.s0, 4.0 * mix.s0, mix.s1, 4.0 * mix.s1, 40.0 * mix.s1];
    if let Some(y) = mix.crossing() {
        breaks.push(y);
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let half = adaptive_simpson_split(
        |y: f64| {
            let p = density(y);
            if p == 0.0 {
                return 0.0;
            }
            let ln_p = if kappa < 1.0 {
                ln_null(y) + mix.log_ratio_to_null(mix.lr(y))
            } else {
                p.ln()
            };
            -p * ln_p
        },
        &breaks,
        Tolerance {
            rel: 1e-12,
            abs: 1e-300,
        },
    )?;
    Ok(2.0 * half)
}

/// `V_1(r, γ)`: `(r/2) ln(1 + γ)` for `r <= 1`, `½ ln(1 + rγ)` otherwise.
pub fn v1(r: f64, gamma: f64) -> Result<f64> {
    ensure(r > 0.0, "r", r, "r > 0")?;
    ensure(gamma >= 0.0, "gamma", gamma, "gamma >= 0")?;
    Ok(if r <= 1.0 {
        0.5 * r * gamma.ln_1p()
    } else {
        0.5 * (r * gamma).ln_1p()
    })
}

/// `V_2(r, γ)`: `(r/2) ln(1 + γΔ(r))` for `r < 1`, `½ ln(1 + rγΔ(1/r))` for
/// `r > 1`, and `½ ln(1 + γ/e)` at `r = 1` by continuity.
pub fn v2(r: f64, gamma: f64) -> Result<f64> {
    ensure(r > 0.0, "r", r, "r > 0")?;
    ensure(gamma >= 0.0, "gamma", gamma, "gamma >= 0")?;
    Ok(if r < 1.0 {
        0.5 * r * (gamma * delta(r)?).ln_1p()
    } else if r == 1.0 {
        0.5 * (gamma / E).ln_1p()
    } else {
        0.5 * (r * gamma * delta(1.0 / r)?).ln_1p()
    })
}

/// `Δ(r) = e^{-1} (1 - r)^{1 - 1/r}` on `0 < r <= 1`, with `Δ(1) = e^{-1}`.
pub fn delta(r: f64) -> Result<f64> {
    ensure(r > 0.0 && r <= 1.0, "r", r, "0 < r <= 1")?;
    if r == 1.0 {
        return Ok(1.0 / E);
    }
    // (1 - r)^{1 - 1/r} = exp((1 - 1/r) ln(1 - r))
    Ok(((1.0 - 1.0 / r) * (-r).ln_1p() - 1.0).exp())
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn diversity_power_bounds(beta in 0.001f64..0.999, dof in 1u32..32) {
            // mean of the lower β-fraction: below β ξ_J(β) and below β
            let p = diversity_power(beta, dof).unwrap();
            prop_assert!(p > 0.0);
            prop_assert!(p <= beta * crate::special::xi(beta, dof).unwrap() * (1.0 + 1e-12));
            prop_assert!(p <= beta);
        }

        #[test]
        fn diversity_power_grows_with_diversity(beta in 0.01f64..0.99, dof in 1u32..16) {
            prop_assert!(diversity_power(beta, dof + 1).unwrap() >= diversity_power(beta, dof).unwrap());
        }

        #[test]
        fn entropy_rate_decreasing(kappa in 0.001f64..0.5, a in 0.0f64..0.9, da in 0.001f64..0.1) {
            let hi = (1.0 - kappa).min(a + da);
            prop_assert!(entropy_rate(kappa, hi).unwrap() <= entropy_rate(kappa, a).unwrap() + 1e-15);
        }

        #[test]
        fn mutual_info_nonnegative(kappa in 0.001f64..0.999, sigma2 in 1e-3f64..1e3) {
            let i = mutual_info_sparse_gaussian(kappa, sigma2).unwrap();
            prop_assert!(i >= 0.0);
            prop_assert!(i <= binary_entropy(kappa).unwrap() + 0.5 * (1.0 + 1.0 / sigma2).ln());
        }
    }
}
