//! Achievability for the nearest-subspace estimator, the converse for any
//! estimator, and their high-SNR envelopes.

use super::{check_diversity, check_kappa, check_snr};
use crate::error::{ensure, Error, Result};
use crate::info::{binary_entropy, conditional_entropy_power, diversity_power, entropy_rate, v1, v2};
use crate::search::{bisect_boundary, nodes_golden_max};

const BETA_GRID: usize = 2001;
const BETA_TOL: f64 = 1e-6;
const RHO_FLOOR: f64 = 1e-8;
const RHO_CEILING: f64 = 1e6;
const RHO_BISECTIONS: usize = 60;

/// `ln(1 + x) + 1/(1 + x) - 1`, accurate for small `x`.
fn e2_denominator(x: f64) -> f64 {
    if x < 1e-3 {
        // alternating series x^2/2 - 2x^3/3 + 3x^4/4 - 4x^5/5
        x * x * (0.5 - x * (2.0 / 3.0 - x * (0.75 - x * 0.8)))
    } else {
        x.ln_1p() - x / (1.0 + x)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `min(E_1(β), E_2(β))`, the excess over `κJ` needed at analysis fraction β.
fn ns_excess(kappa: f64, snr: f64, j: u32, h: f64, beta: f64) -> Result<f64> {
    let jf = j as f64;
    let num = 2.0 * h - 2.0 * entropy_rate(kappa, beta)?;
    let pj = diversity_power(beta, j)?;
    let e1 = ratio(
        num + 2.0 * beta * kappa * jf * (5.0f64 / 3.0).ln(),
        (4.0 / 25.0 * jf * pj * snr).ln_1p() / jf,
    );
    let p1 = if j == 1 { pj } else { diversity_power(beta, 1)? };
    let e2 = ratio(num, e2_denominator(p1 * snr));
    Ok(e1.min(e2))
}

/// Total sampling rate sufficient for the nearest-subspace estimator to reach
/// distortion `alpha`. Returns `+inf` at `alpha = 0`, where the requirement
/// diverges as β → 0.
pub fn ns_upper_bound_rate(kappa: f64, snr: f64, diversity: u32, alpha: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_snr(snr)?;
    check_diversity(diversity)?;
    ensure(
        alpha >= 0.0 && alpha < 1.0 - kappa,
        "alpha",
        alpha,
        "0 <= alpha < 1 - kappa",
    )?;
    if alpha == 0.0 {
        return Ok(f64::INFINITY);
    }
    let h = binary_entropy(kappa)?;
    // α followed by the nodes of a fixed grid on [0, 1] above it, so that
    // raising α only removes candidates
    let step = 1.0 / (BETA_GRID - 1) as f64;
    let nodes: Vec<f64> = std::iter::once(alpha)
        .chain((0..BETA_GRID).map(|i| i as f64 * step).filter(|&b| b > alpha))
        .collect();
    let mut failure = None;
    let (_, best) = nodes_golden_max(
        |b| match ns_excess(kappa, snr, diversity, h, b) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &nodes,
        BETA_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(kappa * diversity as f64 + best.max(0.0))
}

/// Per-β constants of the converse, independent of ρ.
struct ConverseNode {
    beta: f64,
    kappa_eff: f64,
    rate: f64,
    dens: f64,
    gamma_full: f64,
    gamma_split: f64,
    gamma_entropy: f64,
}

struct Converse {
    kappa: f64,
    diversity: f64,
    nodes: Vec<ConverseNode>,
}

impl Converse {
    fn new(kappa: f64, snr: f64, j: u32, alpha: f64) -> Result<Self> {
        let jf = j as f64;
        let step = (1.0 - alpha) / (BETA_GRID - 1) as f64;
        let mut nodes = Vec::with_capacity(BETA_GRID);
        for i in 0..BETA_GRID {
            let beta = if i + 1 == BETA_GRID {
                1.0
            } else {
                alpha + step * i as f64
            };
            if beta <= 0.0 {
                continue;
            }
            let dens = 1.0 - kappa + beta * kappa;
            let kappa_eff = beta * kappa / dens;
            let a_eff = alpha / beta;
            if a_eff >= 1.0 - kappa_eff {
                continue;
            }
            let root = beta.powf(1.0 / jf);
            nodes.push(ConverseNode {
                beta,
                kappa_eff,
                rate: entropy_rate(kappa_eff, a_eff)?,
                dens,
                gamma_full: diversity_power(beta, j)? * snr,
                gamma_split: beta.powf(1.0 - 1.0 / jf) * diversity_power(root, 1)? * snr,
                gamma_entropy: beta * conditional_entropy_power(root)? * snr,
            });
        }
        Ok(Self {
            kappa,
            diversity: jf,
            nodes,
        })
    }

    /// `max_β R(κ', α/β) - J min(Λ_1, Λ_2)`; positive means ρ is not achievable.
    fn gap(&self, rho: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for n in &self.nodes {
            let r = rho / n.dens;
            let l1 = v1(r, n.gamma_full).unwrap_or(f64::NAN);
            let l2 = v1(r, n.gamma_split).unwrap_or(f64::NAN)
                - n.kappa_eff * v2(rho / (n.beta * self.kappa), n.gamma_entropy).unwrap_or(f64::NAN);
            let g = n.rate - self.diversity * l1.min(l2);
            if g > best {
                best = g;
            }
        }
        best
    }
}

/// Supremum of the total rates that no estimator can use to reach
/// distortion `alpha`. Zero when the converse does not bind at any rate.
pub fn lower_bound_rate(kappa: f64, snr: f64, diversity: u32, alpha: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_snr(snr)?;
    check_diversity(diversity)?;
    ensure(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "0 < alpha <= 1")?;
    if alpha >= 1.0 - kappa {
        return Ok(0.0);
    }
    let converse = Converse::new(kappa, snr, diversity, alpha)?;
    if converse.nodes.is_empty() || converse.gap(RHO_FLOOR) <= 0.0 {
        return Ok(0.0);
    }
    let upper = ns_upper_bound_rate(kappa, snr, diversity, alpha)?;
    let mut hi = if upper.is_finite() {
        upper.max(2.0 * RHO_FLOOR)
    } else {
        1.0
    };
    // The bracket should already hold; extend rather than clip if it does not.
    while converse.gap(hi) > 0.0 {
        hi *= 2.0;
        if hi > RHO_CEILING {
            return Err(Error::Divergence {
                what: "converse bisection",
                detail: format!("condition still holds at rho = {hi:e}"),
            });
        }
    }
    Ok(bisect_boundary(
        |rho| converse.gap(rho) > 0.0,
        RHO_FLOOR,
        hi,
        RHO_BISECTIONS,
        false,
    ))
}

/// High-SNR reference curves at `ε = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelopes {
    /// `Jκ + 2 H_b(κ) / ln SNR`
    pub upper: f64,
    /// `Jκ + 2 R(κ, α) / ln SNR`
    pub lower: f64,
}

pub fn high_snr_envelopes(kappa: f64, diversity: u32, alpha: f64, snr: f64) -> Result<Envelopes> {
    check_kappa(kappa)?;
    check_diversity(diversity)?;
    ensure(snr > 1.0, "snr", snr, "snr > 1")?;
    let base = kappa * diversity as f64;
    let ln_snr = snr.ln();
    Ok(Envelopes {
        upper: base + 2.0 * binary_entropy(kappa)? / ln_snr,
        lower: base + 2.0 * entropy_rate(kappa, alpha)? / ln_snr,
    })
}
