//! Support estimators: nearest subspace, matched filter, LASSO (coordinate
//! descent and AMP), and joint thresholding of per-vector estimates.

use super::instance::Instance;
use crate::bounds::lasso_state_evolution;
use crate::error::{ensure, Error, Result};
use crate::special::{chi2_cdf, chi2_sf};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// `(1/k) max(|S \ Ŝ|, |Ŝ \ S|)` for sorted, duplicate-free index sets.
pub fn distortion(truth: &[usize], estimate: &[usize], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Invalid("distortion needs k >= 1".into()));
    }
    let common = truth.iter().filter(|i| estimate.binary_search(i).is_ok()).count();
    let missed = truth.len() - common;
    let false_alarms = estimate.len() - common;
    Ok(missed.max(false_alarms) as f64 / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorId {
    NearestSubspace,
    MatchedFilter,
    Lasso,
    Amp,
    AmpShrunk,
    ScalarChannel,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual_norm: f64,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub estimated_support: Vec<usize>,
    pub distortion: f64,
    pub estimator: EstimatorId,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn new(
        truth: &[usize],
        estimated_support: Vec<usize>,
        estimator: EstimatorId,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let distortion = distortion(truth, &estimated_support, truth.len())?;
        Ok(Self {
            estimated_support,
            distortion,
            estimator,
            diagnostics,
        })
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if c == u128::MAX {
            break;
        }
    }
    c
}

pub const NS_SUBSET_LIMIT: u128 = 1_000_000;

/// Advances `s` to the next k-subset of `0..n` in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Squared distance from `y` to the column span of `a[:, cols]`.
pub(crate) fn residual_sq(a: &DMatrix<f64>, cols: &[usize], y: &DVector<f64>) -> f64 {
    let sub = a.select_columns(cols);
    let q = sub.qr().q();
    let proj = q.transpose() * y;
    (y.norm_squared() - proj.norm_squared()).max(0.0)
}

/// Exhaustive minimizer of `Σ_j dist(Y_j, span A_j(S'))²` over all
/// k-subsets, ties going to the lexicographically first subset.
pub fn nearest_subspace_estimate(inst: &Instance) -> Result<EstimationResult> {
    let (n, k) = (inst.params.n, inst.params.k);
    let subsets = binomial(n, k);
    if subsets > NS_SUBSET_LIMIT {
        return Err(Error::TooLarge {
            subsets,
            limit: NS_SUBSET_LIMIT,
        });
    }
    let mut s: Vec<usize> = (0..k).collect();
    let mut best = (f64::INFINITY, s.clone());
    let mut count = 0;
    loop {
        count += 1;
        let total: f64 = inst
            .matrices
            .iter()
            .zip(&inst.observations)
            .map(|(a, y)| residual_sq(a, &s, y))
            .sum();
        if total < best.0 {
            best = (total, s.clone());
        }
        if !next_subset(&mut s, n) {
            break;
        }
    }
    EstimationResult::new(
        &inst.support,
        best.1,
        EstimatorId::NearestSubspace,
        Diagnostics {
            iterations: count,
            residual_norm: best.0.sqrt(),
            threshold: None,
        },
    )
}

/// `X̂_j = (1/m) sqrt(k/SNR) A_jᵀ Y_j` for every j.
pub fn matched_filter_estimate(inst: &Instance) -> Vec<DVector<f64>> {
    let scale = 1.0 / (inst.params.m as f64 * inst.gain());
    inst.matrices
        .iter()
        .zip(&inst.observations)
        .map(|(a, y)| a.tr_mul(y) * scale)
        .collect()
}

pub(crate) fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoSolution {
    pub x: DVector<f64>,
    pub sweeps: usize,
    /// Largest violation of the optimality conditions.
    pub kkt_residual: f64,
}

/// `½‖Y_j - sqrt(SNR/k) A_j x‖² + λ‖x‖₁`.
pub fn lasso_objective(inst: &Instance, j: usize, lambda: f64, x: &DVector<f64>) -> f64 {
    let r = &inst.observations[j] - &inst.matrices[j] * x * inst.gain();
    0.5 * r.norm_squared() + lambda * x.lp_norm(1)
}

/// KKT violation of `x` for the LASSO objective with design `b`.
fn kkt_violation(b: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    let g = b.tr_mul(&(y - b * x));
    g.iter()
        .zip(x.iter())
        .map(|(&gi, &xi)| {
            if xi == 0.0 {
                (gi.abs() - lambda).max(0.0)
            } else {
                (gi - lambda * xi.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

const CD_MAX_SWEEPS: usize = 100_000;
const CD_STEP_TOL: f64 = 1e-8;
const CD_KKT_TOL: f64 = 1e-7;

/// LASSO for vector `j` by cyclic coordinate descent. Stops once a sweep
/// moves no coordinate by more than 1e-8 and the KKT residual is below 1e-7.
pub fn lasso_estimate(inst: &Instance, lambda: f64, j: usize) -> Result<LassoSolution> {
    ensure(lambda >= 0.0 && lambda.is_finite(), "lambda", lambda, "lambda >= 0")?;
    if j >= inst.params.diversity {
        return Err(Error::Invalid(format!("vector index {j} out of range")));
    }
    let b = &inst.matrices[j] * inst.gain();
    let y = &inst.observations[j];
    let n = inst.params.n;
    let norms: Vec<f64> = b.column_iter().map(|c| c.norm_squared()).collect();
    let mut x = DVector::<f64>::zeros(n);
    let mut r = y.clone();
    for sweep in 1..=CD_MAX_SWEEPS {
        let mut max_step = 0.0f64;
        for i in 0..n {
            if norms[i] == 0.0 {
                continue;
            }
            let col = b.column(i);
            let old = x[i];
            let rho = col.dot(&r) + norms[i] * old;
            let new = soft(rho, lambda) / norms[i];
            if new != old {
                r.axpy(old - new, &col, 1.0);
                x[i] = new;
                max_step = max_step.max((new - old).abs());
            }
        }
        if max_step < CD_STEP_TOL {
            let kkt = kkt_violation(&b, y, &x, lambda);
            if kkt <= CD_KKT_TOL * (1.0 + lambda) {
                return Ok(LassoSolution {
                    x,
                    sweeps: sweep,
                    kkt_residual: kkt,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        what: "LASSO coordinate descent",
        iterations: CD_MAX_SWEEPS,
        trajectory: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmpSolution {
    /// Soft-thresholded estimate; at convergence the LASSO solution.
    pub estimate: DVector<f64>,
    /// Unshrunk effective observation `x + A_jᵀ z / (c m)`.
    pub pseudo_data: DVector<f64>,
    pub iterations: usize,
    /// Final threshold in signal units.
    pub threshold: f64,
    /// False when the iteration cap was reached first. Near a kink of the
    /// soft threshold AMP can settle into a small limit cycle.
    pub converged: bool,
}

/// Smallest θ with `θ (m - #{i : |u_i| > θ}) >= target`. The left side
/// increases in θ, so this solves the LASSO calibration at the current
/// pseudo-data instead of lagging it by one iteration.
fn lasso_calibrated_threshold(u: &DVector<f64>, target: f64, m: usize) -> f64 {
    let mf = m as f64;
    let g = |th: f64| th * (mf - u.iter().filter(|v| v.abs() > th).count() as f64);
    let top = u.amax();
    if top * mf <= target {
        return target / mf;
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

const AMP_MAX_ITER: usize = 500;
const AMP_WARM_TOL: f64 = 1e-4;
const AMP_TOL: f64 = 1e-8;

/// AMP for the LASSO of vector `j`.
///
/// Works in signal units with `c = sqrt(SNR/k)`: `u = x + A_jᵀ z / (c m)`,
/// `x ← η_θ(u)`, `z ← Y_j - c A_j x + (‖x‖₀/m) z`. A first phase couples θ
/// to the state-evolution ratio `t/σ` times the running noise estimate
/// `‖z‖/(c m)`; the second fixes `θ = λ / (c² (m - ‖η_θ(u)‖₀))`, whose
/// fixed point is the LASSO solution.
pub fn amp_estimate(inst: &Instance, lambda: f64, j: usize) -> Result<AmpSolution> {
    ensure(lambda >= 0.0 && lambda.is_finite(), "lambda", lambda, "lambda >= 0")?;
    if j >= inst.params.diversity {
        return Err(Error::Invalid(format!("vector index {j} out of range")));
    }
    let p = &inst.params;
    let (n, m) = (p.n, p.m);
    let mf = m as f64;
    let c = inst.gain();
    let kappa = p.k as f64 / n as f64;
    let r = mf / n as f64;
    let ratio = match lasso_state_evolution(kappa, p.snr, r, lambda) {
        Ok(fp) => fp.t / fp.sigma2.sqrt(),
        Err(_) => crate::special::normal_quantile(1.0 - kappa / 2.0)?,
    };
    let a = &inst.matrices[j];
    let y = &inst.observations[j];
    let mut x = DVector::<f64>::zeros(n);
    let mut z = y.clone();
    let mut calibrated = false;
    for it in 1..=AMP_MAX_ITER {
        let u = &x + a.tr_mul(&z) / (c * mf);
        let threshold = if calibrated {
            lasso_calibrated_threshold(&u, lambda / (c * c), m)
        } else {
            ratio * z.norm() / (c * mf)
        };
        let new_x = u.map(|v| soft(v, threshold));
        let nnz = new_x.iter().filter(|v| **v != 0.0).count() as f64;
        let change = (&new_x - &x).amax();
        z = y - a * &new_x * c + &z * (nnz / mf);
        x = new_x;
        if x.norm() > 1e6 || !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence {
                what: "AMP",
                detail: format!("estimate norm {:e} at iteration {it}", x.norm()),
            });
        }
        let done = calibrated && change < AMP_TOL;
        if done || it == AMP_MAX_ITER {
            let pseudo_data = &x + a.tr_mul(&z) / (c * mf);
            return Ok(AmpSolution {
                estimate: x,
                pseudo_data,
                iterations: it,
                threshold,
                converged: done,
            });
        }
        if change < AMP_WARM_TOL {
            calibrated = true;
        }
    }
    unreachable!("the loop returns at the iteration cap")
}

/// How the joint threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Keep indices whose sum of squares is at least this value.
    Explicit(f64),
    /// Balance the predicted missed-detection fraction against the scaled
    /// false-alarm fraction for prior sparsity `kappa`. Without a known
    /// noise power, σ² is estimated from the median of the statistic.
    Minimax { kappa: f64, sigma2: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdEstimate {
    pub support: Vec<usize>,
    pub threshold: f64,
    /// Noise power used by the minimax rule.
    pub sigma2: Option<f64>,
}

fn bisect(mut f: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if f(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Noise power σ² of the scalar channel from the median of `Σ_j v_j(i)²`,
/// solving `(1-κ) G(med/σ²) + κ G(med/(1+σ²)) = ½` with `G` the χ²_J CDF.
pub fn sigma2_from_median(median: f64, kappa: f64, diversity: u32) -> Result<f64> {
    ensure(median > 0.0, "median", median, "median > 0")?;
    ensure(kappa > 0.0 && kappa < 1.0, "kappa", kappa, "0 < kappa < 1")?;
    let mass = |s2: f64| -> Result<f64> {
        Ok((1.0 - kappa) * chi2_cdf(median / s2, diversity)? + kappa * chi2_cdf(median / (1.0 + s2), diversity)?)
    };
    // mass decreases in σ²; bisect in log σ²
    let mut failure = None;
    let ln_s2 = bisect(
        |l| match mass(l.exp()) {
            Ok(v) => v > 0.5,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        },
        -60.0,
        60.0,
        200,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(ln_s2.exp()),
    }
}

/// Threshold `t` on `Σ_j v_j(i)²` with `G(t/(1+σ²)) = ((1-κ)/κ) Q(t/σ²)`.
pub fn minimax_threshold(sigma2: f64, kappa: f64, diversity: u32) -> Result<f64> {
    ensure(sigma2 > 0.0, "sigma2", sigma2, "sigma2 > 0")?;
    ensure(kappa > 0.0 && kappa < 1.0, "kappa", kappa, "0 < kappa < 1")?;
    let w = (1.0 - kappa) / kappa;
    let gap = |t: f64| -> f64 {
        let md = chi2_cdf(t / (1.0 + sigma2), diversity).unwrap_or(f64::NAN);
        let fa = chi2_sf(t / sigma2, diversity).unwrap_or(f64::NAN);
        md - w * fa
    };
    // gap increases in t from -w to 1
    let mut hi = (1.0 + sigma2) * (diversity as f64 + 10.0);
    while gap(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Divergence {
                what: "minimax threshold",
                detail: "no balance point".into(),
            });
        }
    }
    Ok(bisect(|t| gap(t) < 0.0, 0.0, hi, 200))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `Ŝ = { i : Σ_j v_j(i)² >= t }`.
pub fn joint_threshold(vectors: &[DVector<f64>], rule: ThresholdRule) -> Result<ThresholdEstimate> {
    let Some(first) = vectors.first() else {
        return Err(Error::Invalid("joint thresholding needs at least one vector".into()));
    };
    let n = first.len();
    if n == 0 || vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Invalid("vectors must be nonempty and of equal length".into()));
    }
    let stat: Vec<f64> = (0..n).map(|i| vectors.iter().map(|v| v[i] * v[i]).sum()).collect();
    let (threshold, sigma2) = match rule {
        ThresholdRule::Explicit(t) => {
            ensure(!t.is_nan(), "t", t, "a number")?;
            (t, None)
        }
        ThresholdRule::Minimax { kappa, sigma2 } => {
            let j = vectors.len() as u32;
            let s2 = match sigma2 {
                Some(s2) => s2,
                None => {
                    let mut sorted = stat.clone();
                    sigma2_from_median(median(&mut sorted), kappa, j)?
                }
            };
            (minimax_threshold(s2, kappa, j)?, Some(s2))
        }
    };
    // a zero statistic carries no evidence, so t = 0 keeps only the nonzero ones
    let support = (0..n).filter(|&i| stat[i] > 0.0 && stat[i] >= threshold).collect();
    Ok(ThresholdEstimate {
        support,
        threshold,
        sigma2,
    })
}

/// `(1/k) min_{|Δ| = round(βk)} (1/J) Σ_j ‖X_j(Δ)‖²` over the support
/// values `values[j][i]`, by sorting the per-index average powers.
pub fn empirical_diversity_power(values: &[Vec<f64>], beta: f64) -> Result<f64> {
    ensure((0.0..=1.0).contains(&beta), "beta", beta, "0 <= beta <= 1")?;
    let Some(first) = values.first() else {
        return Err(Error::Invalid("need at least one realization".into()));
    };
    let k = first.len();
    if k == 0 || values.iter().any(|v| v.len() != k) {
        return Err(Error::Invalid(
            "realizations must be nonempty and of equal length".into(),
        ));
    }
    let jf = values.len() as f64;
    let mut power: Vec<f64> = (0..k)
        .map(|i| values.iter().map(|v| v[i] * v[i]).sum::<f64>() / jf)
        .collect();
    power.sort_by(|a, b| a.total_cmp(b));
    let take = (beta * k as f64).round() as usize;
    Ok(power[..take].iter().sum::<f64>() / k as f64)
}
