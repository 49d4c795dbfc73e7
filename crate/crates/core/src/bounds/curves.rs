//! Bound curves over one swept parameter, evaluated in parallel.

use super::theorems::{high_snr_envelopes, lower_bound_rate, ns_upper_bound_rate};
use super::two_stage::{two_stage_distortion, two_stage_rate};
use super::{check_diversity, check_kappa, check_snr, db_to_linear, EstimatorKind, ProblemConfig};
use crate::error::{Error, Result};
use crate::info::entropy_rate;
use crate::search::bisect_boundary;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbscissaKind {
    SnrDb,
    Rho,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrdinateKind {
    Rho,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    Thm1,
    Thm2,
    Thm3Mf,
    Thm3Lasso,
    Thm3Mmse,
    Thm4Envelope,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSide {
    Upper,
    Lower,
}

impl AbscissaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AbscissaKind::SnrDb => "snr_db",
            AbscissaKind::Rho => "rho",
            AbscissaKind::Alpha => "alpha",
        }
    }
}

impl OrdinateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OrdinateKind::Rho => "rho",
            OrdinateKind::Alpha => "alpha",
        }
    }
}

impl BoundSource {
    pub const ALL: [BoundSource; 7] = [
        BoundSource::Thm1,
        BoundSource::Thm2,
        BoundSource::Thm3Mf,
        BoundSource::Thm3Lasso,
        BoundSource::Thm3Mmse,
        BoundSource::Thm4Envelope,
        BoundSource::Simulation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::Thm1 => "thm1",
            BoundSource::Thm2 => "thm2",
            BoundSource::Thm3Mf => "thm3_mf",
            BoundSource::Thm3Lasso => "thm3_lasso",
            BoundSource::Thm3Mmse => "thm3_mmse",
            BoundSource::Thm4Envelope => "thm4_envelope",
            BoundSource::Simulation => "simulation",
        }
    }

    fn estimator(self) -> Option<EstimatorKind> {
        match self {
            BoundSource::Thm3Mf => Some(EstimatorKind::MatchedFilter),
            BoundSource::Thm3Lasso => Some(EstimatorKind::Lasso),
            BoundSource::Thm3Mmse => Some(EstimatorKind::Mmse),
            _ => None,
        }
    }
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundSource::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown bound source `{s}`")))
    }
}

impl FromStr for AbscissaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr_db" | "snr" => Ok(AbscissaKind::SnrDb),
            "rho" => Ok(AbscissaKind::Rho),
            "alpha" => Ok(AbscissaKind::Alpha),
            _ => Err(Error::Invalid(format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// A swept axis: `points` values from `min` to `max`, evenly spaced in
/// value or in logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: AbscissaKind,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Sweep {
    pub fn new(axis: AbscissaKind, min: f64, max: f64, points: usize, log: bool) -> Result<Self> {
        let s = Self {
            axis,
            min,
            max,
            points,
            log,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Invalid("a sweep needs at least 2 points".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Invalid(format!(
                "sweep range must satisfy min < max, got {}..{}",
                self.min, self.max
            )));
        }
        if self.log && self.min <= 0.0 {
            return Err(Error::Invalid("a log sweep needs a positive minimum".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    return self.max;
                }
                let f = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = Error;
    /// `axis:min:max:points:log|lin`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Invalid(format!("sweep `{s}` is not axis:min:max:points:log|lin"));
        if parts.len() != 5 {
            return Err(bad());
        }
        let axis = parts[0].parse()?;
        let min = parts[1].parse().map_err(|_| bad())?;
        let max = parts[2].parse().map_err(|_| bad())?;
        let points = parts[3].parse().map_err(|_| bad())?;
        let log = match parts[4] {
            "log" => true,
            "lin" => false,
            _ => return Err(bad()),
        };
        Sweep::new(axis, min, max, points, log)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub abscissa: f64,
    /// `None` when evaluation failed at this point; see `error`.
    pub ordinate: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub points: Vec<CurvePoint>,
    pub abscissa_kind: AbscissaKind,
    pub ordinate_kind: OrdinateKind,
    pub source: BoundSource,
    /// Only for [`BoundSource::Thm4Envelope`].
    pub envelope: Option<EnvelopeSide>,
    /// Settings of the non-swept parameters.
    pub config: ProblemConfig,
}

impl BoundCurve {
    /// File-name friendly label, e.g. `thm1` or `thm4_envelope_upper`.
    pub fn label(&self) -> String {
        match self.envelope {
            Some(EnvelopeSide::Upper) => format!("{}_upper", self.source),
            Some(EnvelopeSide::Lower) => format!("{}_lower", self.source),
            None => self.source.to_string(),
        }
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.ordinate.is_none()).count()
    }
}

fn rate_at(source: BoundSource, side: Option<EnvelopeSide>, c: &ProblemConfig) -> Result<f64> {
    match source {
        BoundSource::Thm1 => ns_upper_bound_rate(c.kappa, c.snr, c.diversity, c.alpha),
        BoundSource::Thm2 => lower_bound_rate(c.kappa, c.snr, c.diversity, c.alpha),
        BoundSource::Thm3Mf | BoundSource::Thm3Lasso | BoundSource::Thm3Mmse => {
            two_stage_rate(c.kappa, c.snr, c.diversity, c.alpha, source.estimator().expect("thm3"))
        }
        BoundSource::Thm4Envelope => {
            let e = high_snr_envelopes(c.kappa, c.diversity, c.alpha, c.snr)?;
            Ok(match side.unwrap_or(EnvelopeSide::Upper) {
                EnvelopeSide::Upper => e.upper,
                EnvelopeSide::Lower => e.lower,
            })
        }
        BoundSource::Simulation => Err(Error::Invalid("simulation curves come from the simulator".into())),
    }
}

const ALPHA_FLOOR: f64 = 1e-12;
const ALPHA_BISECTIONS: usize = 40;

/// Distortion as a function of total rate, the inverse of the rate curve
/// in α. Rates below the curve's value near `α = 1 - κ` give the clamp
/// `1 - κ`; rates above its value at `α = 1e-12` give `1e-12`.
pub fn distortion_vs_rho(
    source: BoundSource,
    side: Option<EnvelopeSide>,
    kappa: f64,
    snr: f64,
    diversity: u32,
    rho: f64,
) -> Result<f64> {
    check_kappa(kappa)?;
    check_snr(snr)?;
    check_diversity(diversity)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain {
            name: "rho",
            value: rho,
            expected: "rho > 0",
        });
    }
    let cap = 1.0 - kappa;
    if let Some(kind) = source.estimator() {
        return two_stage_distortion(kappa, snr, diversity, rho, kind);
    }
    let rate = |alpha: f64| -> Result<f64> {
        match source {
            BoundSource::Thm1 => ns_upper_bound_rate(kappa, snr, diversity, alpha),
            BoundSource::Thm2 => lower_bound_rate(kappa, snr, diversity, alpha),
            BoundSource::Thm4Envelope => match side.unwrap_or(EnvelopeSide::Lower) {
                EnvelopeSide::Lower => {
                    if snr <= 1.0 {
                        return Err(Error::Domain {
                            name: "snr",
                            value: snr,
                            expected: "snr > 1",
                        });
                    }
                    Ok(kappa * diversity as f64 + 2.0 * entropy_rate(kappa, alpha)? / snr.ln())
                }
                EnvelopeSide::Upper => Err(Error::Invalid(
                    "the upper envelope does not depend on alpha and has no inverse".into(),
                )),
            },
            _ => Err(Error::Invalid(format!("{source} has no distortion curve"))),
        }
    };
    let top = cap * (1.0 - 1e-9);
    if rate(top)? > rho {
        return Ok(cap);
    }
    if rate(ALPHA_FLOOR)? <= rho {
        return Ok(ALPHA_FLOOR);
    }
    let mut failure = None;
    let alpha = bisect_boundary(
        |a| match rate(a) {
            Ok(v) => v > rho,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        },
        ALPHA_FLOOR,
        top,
        ALPHA_BISECTIONS,
        true,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(alpha.min(cap)),
    }
}

/// Evaluates one bound along `sweep`, holding the other parameters of
/// `base` fixed. Abscissae `snr_db` and `alpha` give rates; `rho` gives
/// distortions. Points are computed in parallel and returned in sweep order.
pub fn generate_curve(
    source: BoundSource,
    side: Option<EnvelopeSide>,
    base: &ProblemConfig,
    sweep: &Sweep,
) -> Result<BoundCurve> {
    sweep.validate()?;
    if source == BoundSource::Simulation {
        return Err(Error::Invalid("simulation curves come from the simulator".into()));
    }
    let side = if source == BoundSource::Thm4Envelope {
        Some(side.unwrap_or(EnvelopeSide::Upper))
    } else {
        None
    };
    let ordinate_kind = match sweep.axis {
        AbscissaKind::Rho => OrdinateKind::Alpha,
        _ => OrdinateKind::Rho,
    };
    let xs = sweep.values();
    let points = xs
        .par_iter()
        .map(|&x| {
            let mut c = *base;
            let value = match sweep.axis {
                AbscissaKind::SnrDb => {
                    c.snr = db_to_linear(x);
                    rate_at(source, side, &c)
                }
                AbscissaKind::Alpha => {
                    c.alpha = x;
                    rate_at(source, side, &c)
                }
                AbscissaKind::Rho => {
                    c.rho = x;
                    distortion_vs_rho(source, side, c.kappa, c.snr, c.diversity, x)
                }
            };
            let value = value.and_then(|v| {
                if v.is_finite() && v >= 0.0 {
                    Ok(v)
                } else {
                    Err(Error::Invalid(format!("non-finite value {v}")))
                }
            });
            match value {
                Ok(v) => CurvePoint {
                    abscissa: x,
                    ordinate: Some(v),
                    error: None,
                },
                Err(e) => CurvePoint {
                    abscissa: x,
                    ordinate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(BoundCurve {
        points,
        abscissa_kind: sweep.axis,
        ordinate_kind,
        source,
        envelope: side,
        config: *base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ProblemConfig {
        ProblemConfig::new(1e-4, 1e4, 1, 0.1, 1.0).unwrap()
    }

    #[test]
    fn sweep_parsing() {
        let s: Sweep = "snr_db:0:60:13:lin".parse().unwrap();
        let v = s.values();
        assert_eq!(v.len(), 13);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[12], 60.0);
        assert!((v[1] - 5.0).abs() < 1e-12);
        let s: Sweep = "rho:1e-4:1e-2:3:log".parse().unwrap();
        assert!((s.values()[1] - 1e-3).abs() < 1e-15);
        assert!("snr_db:0:60:1:lin".parse::<Sweep>().is_err());
        assert!("snr_db:0:60:5:cubic".parse::<Sweep>().is_err());
        assert!("rho:0:1:5:log".parse::<Sweep>().is_err());
        assert!("beta:0:1:5:lin".parse::<Sweep>().is_err());
    }

    #[test]
    fn thm1_snr_curve_nonincreasing() {
        let sweep: Sweep = "snr_db:0:60:13:lin".parse().unwrap();
        let c = generate_curve(BoundSource::Thm1, None, &base(), &sweep).unwrap();
        assert_eq!(c.points.len(), 13);
        assert_eq!(c.failures(), 0);
        for w in c.points.windows(2) {
            assert!(w[1].ordinate.unwrap() <= w[0].ordinate.unwrap());
        }
    }

    #[test]
    fn distortion_inverts_rate() {
        let rho = ns_upper_bound_rate(1e-4, 1e4, 4, 0.05).unwrap();
        let a = distortion_vs_rho(BoundSource::Thm1, None, 1e-4, 1e4, 4, rho).unwrap();
        // the rate is flat below its interior maximizer, so `a` may sit below 0.05
        assert!(a <= 0.05 * (1.0 + 1e-6), "{a}");
        assert!(ns_upper_bound_rate(1e-4, 1e4, 4, a).unwrap() <= rho * (1.0 + 1e-9));
        assert!(ns_upper_bound_rate(1e-4, 1e4, 4, a * 0.99).unwrap() > rho);
        let rho = ns_upper_bound_rate(1e-2, 1e4, 1, 0.01).unwrap();
        let a = distortion_vs_rho(BoundSource::Thm1, None, 1e-2, 1e4, 1, rho).unwrap();
        assert!((a / 0.01 - 1.0).abs() < 1e-4, "{a}");
        // far below every rate: saturates at the clamp
        let a = distortion_vs_rho(BoundSource::Thm1, None, 1e-4, 1e4, 4, 1e-9).unwrap();
        assert_eq!(a, 1.0 - 1e-4);
    }

    #[test]
    fn simulation_and_upper_inverse_rejected() {
        let sweep: Sweep = "snr_db:0:60:3:lin".parse().unwrap();
        assert!(generate_curve(BoundSource::Simulation, None, &base(), &sweep).is_err());
        let sweep: Sweep = "rho:1e-4:1e-3:3:log".parse().unwrap();
        let c = generate_curve(BoundSource::Thm4Envelope, Some(EnvelopeSide::Upper), &base(), &sweep).unwrap();
        assert_eq!(c.failures(), 3);
        assert_eq!(c.label(), "thm4_envelope_upper");
    }
}
