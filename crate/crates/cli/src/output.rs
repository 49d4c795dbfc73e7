//! CSV writing. Numbers use the shortest representation that round-trips,
//! switching to exponent notation outside `[1e-4, 1e6)`; non-finite values
//! become empty cells.

use divsparse_core::bounds::{linear_to_db, BoundCurve, OrdinateKind};
use std::fmt::Write as _;
use std::path::Path;

use crate::Failure;

pub const CURVE_HEADER: &str = "abscissa,ordinate,source,kappa,snr_db,J,alpha";

pub fn num(v: f64) -> String {
    if !v.is_finite() {
        String::new()
    } else if v == 0.0 {
        "0".into()
    } else if (1e-4..1e6).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One curve as CSV, rows sorted by abscissa. The `snr_db` and `alpha`
/// columns hold the values in force at each row.
pub fn curve_csv(curve: &BoundCurve) -> String {
    let c = &curve.config;
    let label = curve.label();
    let mut points: Vec<_> = curve.points.iter().collect();
    points.sort_by(|a, b| a.abscissa.total_cmp(&b.abscissa));
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for p in points {
        let (snr_db, alpha) = match curve.abscissa_kind {
            divsparse_core::bounds::AbscissaKind::SnrDb => (p.abscissa, Some(c.alpha)),
            divsparse_core::bounds::AbscissaKind::Alpha => (linear_to_db(c.snr), Some(p.abscissa)),
            divsparse_core::bounds::AbscissaKind::Rho => (
                linear_to_db(c.snr),
                match curve.ordinate_kind {
                    OrdinateKind::Alpha => p.ordinate,
                    OrdinateKind::Rho => Some(c.alpha),
                },
            ),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(p.abscissa),
            opt(p.ordinate),
            label,
            num(c.kappa),
            num(snr_db),
            c.diversity,
            opt(alpha)
        );
    }
    s
}

pub fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Writes the curve and reports its failed points on stderr.
/// Returns the number of failed points.
pub fn write_curve(path: &Path, curve: &BoundCurve) -> Result<usize, Failure> {
    write(path, &curve_csv(curve))?;
    for p in curve.points.iter().filter(|p| p.ordinate.is_none()) {
        eprintln!(
            "warning: {} at {} = {}: {}",
            curve.label(),
            curve.abscissa_kind.as_str(),
            num(p.abscissa),
            p.error.as_deref().unwrap_or("failed")
        );
    }
    Ok(curve.failures())
}
