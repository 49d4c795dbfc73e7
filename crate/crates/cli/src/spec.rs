//! Run settings: defaults, an optional JSON file, then command-line flags.

use clap::Args;
use divsparse_core::bounds::{db_to_linear, ProblemConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::Failure;

/// Flags shared by every subcommand. Each one overrides the matching field
/// of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Prior sparsity κ = k/n.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// SNR in dB.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Diversity: number of signal vectors sharing one support.
    #[arg(long = "J")]
    pub diversity: Option<u32>,
    /// Target distortion.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Total sampling rate ρ = J m / n.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Swept axis, `axis:min:max:points:log|lin` with axis snr_db, alpha or rho.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Comma-separated bound sources or simulation pipelines.
    #[arg(long)]
    pub estimators: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// LASSO penalty; by default the one minimizing the predicted noise power.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Noise power of the `scalar` simulation pipeline.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Points per curve for `figures`.
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the fields above (`snr_db`, `J`, ...).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpec {
    command: Option<String>,
    kappa: Option<f64>,
    snr_db: Option<f64>,
    #[serde(rename = "J")]
    diversity: Option<u32>,
    alpha: Option<f64>,
    rho: Option<f64>,
    sweep: Option<String>,
    estimators: Option<Estimators>,
    n: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    lambda: Option<f64>,
    sigma2: Option<f64>,
    points: Option<usize>,
    output_path: Option<PathBuf>,
    out: Option<PathBuf>,
    threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Estimators {
    List(Vec<String>),
    Joined(String),
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub kappa: f64,
    pub snr_db: f64,
    pub diversity: u32,
    pub alpha: f64,
    pub rho: f64,
    pub sweep: String,
    pub estimators: Vec<String>,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub lambda: Option<f64>,
    pub sigma2: Option<f64>,
    pub points: usize,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

impl RunSpec {
    pub fn resolve(command: &str, flags: &Flags, default_estimators: &str) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(path) => read_file(path)?,
            None => FileSpec::default(),
        };
        if let Some(c) = &file.command {
            if c != command {
                return Err(Failure::Usage(format!("config file is for `{c}`, not `{command}`")));
            }
        }
        let estimators = match (&flags.estimators, &file.estimators) {
            (Some(s), _) => split_list(s),
            (None, Some(Estimators::Joined(s))) => split_list(s),
            (None, Some(Estimators::List(v))) => v.iter().map(|s| s.trim().to_string()).collect(),
            (None, None) => split_list(default_estimators),
        };
        let spec = RunSpec {
            kappa: flags.kappa.or(file.kappa).unwrap_or(1e-4),
            snr_db: flags.snr_db.or(file.snr_db).unwrap_or(40.0),
            diversity: flags.diversity.or(file.diversity).unwrap_or(1),
            alpha: flags.alpha.or(file.alpha).unwrap_or(0.1),
            rho: flags.rho.or(file.rho).unwrap_or(1.0),
            sweep: flags
                .sweep
                .clone()
                .or(file.sweep)
                .unwrap_or_else(|| "snr_db:0:60:13:lin".into()),
            estimators,
            n: flags.n.or(file.n).unwrap_or(1000),
            trials: flags.trials.or(file.trials).unwrap_or(100),
            seed: flags.seed.or(file.seed).unwrap_or(1),
            lambda: flags.lambda.or(file.lambda),
            sigma2: flags.sigma2.or(file.sigma2),
            points: flags.points.or(file.points).unwrap_or(25),
            out: flags
                .out
                .clone()
                .or(file.out)
                .or(file.output_path)
                .unwrap_or_else(|| "out".into()),
            threads: flags.threads.or(file.threads),
        };
        if spec.estimators.is_empty() {
            return Err(Failure::Usage("no estimators requested".into()));
        }
        if spec.points < 2 {
            return Err(Failure::Usage("need at least 2 points per curve".into()));
        }
        if spec.threads == Some(0) {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        Ok(spec)
    }

    pub fn snr(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    pub fn problem(&self) -> Result<ProblemConfig, Failure> {
        ProblemConfig::new(self.kappa, self.snr(), self.diversity, self.alpha, self.rho)
            .map_err(|e| Failure::Usage(e.to_string()))
    }

    /// Creates the output directory.
    pub fn out_dir(&self) -> Result<&Path, Failure> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn read_file(path: &Path) -> Result<FileSpec, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"kappa": 0.01, "J": 4, "estimators": ["thm1", "mf"], "snr_db": 20}"#,
        )
        .unwrap();
        let flags = Flags {
            config: Some(path),
            diversity: Some(2),
            ..Flags::default()
        };
        let s = RunSpec::resolve("bounds", &flags, "thm1").unwrap();
        assert_eq!(s.kappa, 0.01);
        assert_eq!(s.diversity, 2);
        assert_eq!(s.estimators, vec!["thm1", "mf"]);
        assert_eq!(s.snr(), 100.0);
    }

    #[test]
    fn rejects_mismatched_or_unknown() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"command": "simulate"}"#).unwrap();
        let flags = Flags {
            config: Some(path.clone()),
            ..Flags::default()
        };
        assert!(matches!(
            RunSpec::resolve("bounds", &flags, "thm1"),
            Err(Failure::Usage(_))
        ));
        std::fs::write(&path, r#"{"kapa": 0.1}"#).unwrap();
        assert!(RunSpec::resolve("bounds", &flags, "thm1").is_err());
        let empty = Flags {
            estimators: Some(" , ".into()),
            ..Flags::default()
        };
        assert!(matches!(
            RunSpec::resolve("bounds", &empty, "thm1"),
            Err(Failure::Usage(_))
        ));
    }
}
