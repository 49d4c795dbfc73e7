use divsparse_core::bounds::{generate_curve, AbscissaKind, BoundCurve, BoundSource, EnvelopeSide, Sweep};
use std::path::Path;

use crate::spec::RunSpec;
use crate::{classify, output, Failure};

/// Resolves a requested estimator name to the curves it stands for. The
/// envelope yields both sides, except on a ρ sweep where only the lower
/// side can be inverted.
pub fn sources(name: &str, axis: AbscissaKind) -> Result<Vec<(BoundSource, Option<EnvelopeSide>)>, Failure> {
    let one = |s| Ok(vec![(s, None)]);
    match name {
        "thm1" | "ns" => one(BoundSource::Thm1),
        "thm2" | "converse" => one(BoundSource::Thm2),
        "mf" | "thm3_mf" => one(BoundSource::Thm3Mf),
        "lasso" | "thm3_lasso" => one(BoundSource::Thm3Lasso),
        "mmse" | "thm3_mmse" => one(BoundSource::Thm3Mmse),
        "thm4_upper" => Ok(vec![(BoundSource::Thm4Envelope, Some(EnvelopeSide::Upper))]),
        "thm4_lower" => Ok(vec![(BoundSource::Thm4Envelope, Some(EnvelopeSide::Lower))]),
        "thm4" | "thm4_envelope" | "envelope" => Ok(match axis {
            AbscissaKind::Rho => vec![(BoundSource::Thm4Envelope, Some(EnvelopeSide::Lower))],
            _ => vec![
                (BoundSource::Thm4Envelope, Some(EnvelopeSide::Upper)),
                (BoundSource::Thm4Envelope, Some(EnvelopeSide::Lower)),
            ],
        }),
        _ => Err(Failure::Usage(format!(
            "unknown estimator `{name}` (expected thm1, thm2, mf, lasso, mmse or thm4_envelope)"
        ))),
    }
}

/// Computes and writes one CSV per curve into `dir`, named by `prefix` and
/// the curve label. Returns the file names and the number of failed points.
pub fn write_curves(
    dir: &Path,
    prefix: &str,
    spec: &RunSpec,
    names: &[String],
    sweep: &Sweep,
) -> Result<(Vec<String>, usize), Failure> {
    let base = spec.problem()?;
    let mut requested = Vec::new();
    for name in names {
        for s in sources(name, sweep.axis)? {
            if !requested.contains(&s) {
                requested.push(s);
            }
        }
    }
    let curves: Vec<BoundCurve> = requested
        .into_iter()
        .map(|(source, side)| generate_curve(source, side, &base, sweep).map_err(classify))
        .collect::<Result<_, _>>()?;
    let mut files = Vec::new();
    let mut failed = 0;
    for curve in &curves {
        let file = format!("{prefix}{}.csv", curve.label());
        failed += output::write_curve(&dir.join(&file), curve)?;
        files.push(file);
    }
    Ok((files, failed))
}

pub fn run(spec: &RunSpec) -> Result<(), Failure> {
    let sweep: Sweep = spec.sweep.parse().map_err(classify)?;
    let dir = spec.out_dir()?;
    let (files, failed) = write_curves(dir, "", spec, &spec.estimators, &sweep)?;
    for f in &files {
        println!("{f}");
    }
    if failed > 0 {
        return Err(Failure::Partial(format!(
            "{failed} points failed; their ordinates are empty"
        )));
    }
    Ok(())
}
