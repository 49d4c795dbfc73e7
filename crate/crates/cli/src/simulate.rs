use divsparse_core::bounds::{lasso_state_evolution, mf_sigma2, sigma2_threshold};
use divsparse_core::simulator::{monte_carlo, MonteCarloConfig, MonteCarloSummary, Pipeline, ThresholdRule};
use serde::Serialize;
use std::fmt::Write as _;

use crate::output::{num, opt, write};
use crate::spec::RunSpec;
use crate::{classify, Failure};

pub const TRIALS_HEADER: &str = "trial,seed,distortion,threshold,support_size";

#[derive(Debug, Serialize)]
struct Summary {
    pipeline: &'static str,
    mean_distortion: f64,
    std_err: f64,
    q05: f64,
    q50: f64,
    q95: f64,
    achieved_fraction: f64,
    trials: usize,
    seed: u64,
    n: usize,
    k: usize,
    m: usize,
    lambda: Option<f64>,
    /// Predicted effective noise power of the scalar channel, if any.
    theory_sigma2: Option<f64>,
    /// Largest noise power at which thresholding reaches distortion α.
    theory_threshold: Option<f64>,
}

pub fn pipeline(name: &str, spec: &RunSpec) -> Result<Pipeline, Failure> {
    Ok(match name {
        "ns" | "nearest_subspace" => Pipeline::NearestSubspace,
        "mf" | "matched_filter" => Pipeline::MatchedFilter,
        "lasso" => Pipeline::Lasso { lambda: spec.lambda },
        "amp" => Pipeline::Amp { lambda: spec.lambda },
        "amp_shrunk" => Pipeline::AmpShrunk { lambda: spec.lambda },
        "scalar" => Pipeline::ScalarChannel {
            sigma2: spec
                .sigma2
                .ok_or_else(|| Failure::Usage("the scalar pipeline needs --sigma2".into()))?,
        },
        _ => {
            return Err(Failure::Usage(format!(
                "unknown pipeline `{name}` (expected ns, mf, lasso, amp, amp_shrunk or scalar)"
            )))
        }
    })
}

/// Thresholds use the known noise power on the scalar channel and the
/// median estimate everywhere else.
fn config(spec: &RunSpec, pipeline: Pipeline) -> Result<MonteCarloConfig, Failure> {
    let problem = spec.problem()?;
    let sigma2 = match pipeline {
        Pipeline::ScalarChannel { sigma2 } => Some(sigma2),
        _ => None,
    };
    let cfg = MonteCarloConfig {
        problem,
        n: spec.n,
        trials: spec.trials,
        pipeline,
        threshold: ThresholdRule::Minimax {
            kappa: problem.kappa,
            sigma2,
        },
        seed: spec.seed,
        workers: 0,
    };
    cfg.validate().map_err(classify)?;
    Ok(cfg)
}

fn theory_sigma2(cfg: &MonteCarloConfig, lambda: Option<f64>) -> Option<f64> {
    let p = &cfg.problem;
    let r = p.per_vector_rate();
    match cfg.pipeline {
        Pipeline::MatchedFilter => mf_sigma2(p.kappa, p.snr, r).ok(),
        Pipeline::Lasso { .. } | Pipeline::Amp { .. } | Pipeline::AmpShrunk { .. } => {
            lasso_state_evolution(p.kappa, p.snr, r, lambda?).ok().map(|f| f.sigma2)
        }
        Pipeline::ScalarChannel { sigma2 } => Some(sigma2),
        Pipeline::NearestSubspace => None,
    }
}

fn trials_csv(summary: &MonteCarloSummary) -> String {
    let mut s = String::from(TRIALS_HEADER);
    s.push('\n');
    for t in &summary.trials {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            t.index,
            t.seed,
            num(t.result.distortion),
            opt(t.result.diagnostics.threshold),
            t.result.estimated_support.len()
        );
    }
    s
}

pub fn run(spec: &RunSpec) -> Result<(), Failure> {
    let pipelines: Vec<Pipeline> = spec
        .estimators
        .iter()
        .map(|e| pipeline(e, spec))
        .collect::<Result<_, _>>()?;
    let configs: Vec<MonteCarloConfig> = pipelines
        .into_iter()
        .map(|p| config(spec, p))
        .collect::<Result<_, _>>()?;
    let dir = spec.out_dir()?;
    let mut errors = Vec::new();
    for cfg in &configs {
        let name = cfg.pipeline.name();
        let summary = match monte_carlo(cfg) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {name}: {e}");
                errors.push(format!("{name}: {e}"));
                continue;
            }
        };
        let (k, m) = cfg.dimensions();
        let p = &cfg.problem;
        let out = Summary {
            pipeline: name,
            mean_distortion: summary.mean,
            std_err: summary.std_err,
            q05: summary.q05,
            q50: summary.q50,
            q95: summary.q95,
            achieved_fraction: summary.achieved_fraction,
            trials: cfg.trials,
            seed: cfg.seed,
            n: cfg.n,
            k,
            m,
            lambda: summary.lambda,
            theory_sigma2: theory_sigma2(cfg, summary.lambda),
            theory_threshold: sigma2_threshold(p.kappa, p.diversity, p.alpha).ok(),
        };
        let json = serde_json::to_string_pretty(&out).map_err(|e| Failure::Numeric(e.to_string()))?;
        write(&dir.join(format!("summary_{name}.json")), &(json + "\n"))?;
        write(&dir.join(format!("trials_{name}.csv")), &trials_csv(&summary))?;
        println!(
            "{name}: mean distortion {} (q05 {}, q50 {}, q95 {}), achieved fraction {} over {} trials",
            num(summary.mean),
            num(summary.q05),
            num(summary.q50),
            num(summary.q95),
            num(summary.achieved_fraction),
            cfg.trials
        );
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numeric(errors.join("; ")))
    }
}
