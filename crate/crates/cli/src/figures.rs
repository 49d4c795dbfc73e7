use divsparse_core::bounds::{AbscissaKind, Sweep};
use std::fmt::Write as _;

use crate::bounds::write_curves;
use crate::output::write;
use crate::spec::RunSpec;
use crate::{classify, Failure};

const KAPPA: f64 = 1e-4;

struct Figure {
    name: &'static str,
    title: &'static str,
    snr_db: f64,
    alpha: f64,
    diversities: &'static [u32],
    estimators: &'static [&'static str],
    axis: AbscissaKind,
    range: (f64, f64),
    log: bool,
    xlabel: &'static str,
    ylabel: &'static str,
    logscale: &'static str,
}

const FIGURES: [Figure; 4] = [
    Figure {
        name: "fig3",
        title: "total sampling rate vs SNR, alpha = 0.1",
        snr_db: 40.0,
        alpha: 0.1,
        diversities: &[1, 4, 16],
        estimators: &["thm1", "thm2"],
        axis: AbscissaKind::SnrDb,
        range: (0.0, 60.0),
        log: false,
        xlabel: "SNR (dB)",
        ylabel: "rho",
        logscale: "y",
    },
    Figure {
        name: "fig4",
        title: "distortion vs total sampling rate, SNR = 40 dB",
        snr_db: 40.0,
        alpha: 0.1,
        diversities: &[1, 4, 16],
        estimators: &["thm1", "thm2"],
        axis: AbscissaKind::Rho,
        range: (1e-4, 1e-1),
        log: true,
        xlabel: "rho",
        ylabel: "alpha",
        logscale: "xy",
    },
    Figure {
        name: "fig5",
        title: "nearest subspace, total sampling rate vs distortion, SNR = 40 dB",
        snr_db: 40.0,
        alpha: 0.1,
        diversities: &[1, 2, 4, 8, 16],
        estimators: &["thm1"],
        axis: AbscissaKind::Alpha,
        range: (1e-5, 0.5),
        log: true,
        xlabel: "alpha",
        ylabel: "rho",
        logscale: "xy",
    },
    Figure {
        name: "fig6",
        title: "LASSO and thresholding, distortion vs total sampling rate, SNR = 30 dB",
        snr_db: 30.0,
        alpha: 0.1,
        diversities: &[1, 2, 4, 8, 16],
        estimators: &["thm3_lasso"],
        axis: AbscissaKind::Rho,
        range: (1e-3, 1.0),
        log: true,
        xlabel: "rho",
        ylabel: "alpha",
        logscale: "xy",
    },
];

/// Extra high-SNR curves on the first figure, from 20 dB where the
/// envelopes are meaningful.
const ENVELOPE_FROM_DB: f64 = 20.0;

pub fn run(spec: &RunSpec) -> Result<(), Failure> {
    let dir = spec.out_dir()?;
    let mut script = String::from(
        "# gnuplot script for the CSV files in this directory\n\
         set datafile separator ','\n\
         set datafile missing ''\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 800,600\n",
    );
    let mut failed = 0;
    for fig in &FIGURES {
        let mut plotted = Vec::new();
        for &j in fig.diversities {
            let mut s = spec.clone();
            s.kappa = KAPPA;
            s.snr_db = fig.snr_db;
            s.alpha = fig.alpha;
            s.diversity = j;
            let names: Vec<String> = fig.estimators.iter().map(|e| e.to_string()).collect();
            let sweep = Sweep::new(fig.axis, fig.range.0, fig.range.1, spec.points, fig.log).map_err(classify)?;
            let prefix = format!("{}_J{j}_", fig.name);
            let (files, f) = write_curves(dir, &prefix, &s, &names, &sweep)?;
            failed += f;
            plotted.extend(files.into_iter().map(|file| (file, j)));
            if fig.name == "fig3" {
                let sweep =
                    Sweep::new(fig.axis, ENVELOPE_FROM_DB, fig.range.1, spec.points, false).map_err(classify)?;
                let (files, f) = write_curves(dir, &prefix, &s, &["thm4_envelope".to_string()], &sweep)?;
                failed += f;
                plotted.extend(files.into_iter().map(|file| (file, j)));
            }
        }
        let _ = writeln!(script, "\nset output '{}.png'", fig.name);
        let _ = writeln!(script, "set title '{}'", fig.title);
        let _ = writeln!(script, "set xlabel '{}'\nset ylabel '{}'", fig.xlabel, fig.ylabel);
        let _ = writeln!(script, "unset logscale\nset logscale {}", fig.logscale);
        let lines: Vec<String> = plotted
            .iter()
            .map(|(file, j)| {
                let label = file.trim_end_matches(".csv").splitn(3, '_').nth(2).unwrap_or(file);
                format!("'{file}' using 1:2 with lines title '{label} J={j}'")
            })
            .collect();
        let _ = writeln!(script, "plot {}", lines.join(", \\\n     "));
        for (file, _) in &plotted {
            println!("{file}");
        }
    }
    write(&dir.join("plot.gp"), &script)?;
    println!("plot.gp");
    if failed > 0 {
        return Err(Failure::Partial(format!(
            "{failed} points failed; their ordinates are empty"
        )));
    }
    Ok(())
}
