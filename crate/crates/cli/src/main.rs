//! `divsparse`: bound curves, figure datasets, Monte Carlo runs and a
//! self-check of the numerical invariants.

mod bounds;
mod figures;
mod output;
mod selfcheck;
mod simulate;
mod spec;

use clap::{Parser, Subcommand};
use spec::{Flags, RunSpec};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "divsparse",
    version,
    about = "Joint sparsity pattern estimation with diversity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound curves over one swept parameter, one CSV per source.
    Bounds(Flags),
    /// Monte Carlo runs of the simulation pipelines.
    Simulate(Flags),
    /// Datasets for the four reference figures plus a gnuplot script.
    Figures(Flags),
    /// Named numerical invariants with pass/fail status.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, clap::Args)]
struct SelfcheckArgs {
    #[command(flatten)]
    flags: Flags,
    /// Override a tolerance, `name=value`. Repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
    /// Some points or trials failed; everything else was written.
    Partial(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Partial(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Partial(m) => m,
        }
    }
}

/// Maps a core error raised while checking inputs to a usage error, and
/// anything else to a numerical failure.
pub fn classify(e: divsparse_core::Error) -> Failure {
    use divsparse_core::Error;
    match e {
        Error::Domain { .. } | Error::Invalid(_) | Error::TooLarge { .. } => Failure::Usage(e.to_string()),
        _ => Failure::Numeric(e.to_string()),
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {t} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds(flags) => {
            let spec = RunSpec::resolve("bounds", &flags, "thm1,thm2")?;
            set_threads(spec.threads)?;
            bounds::run(&spec)
        }
        Command::Simulate(flags) => {
            let spec = RunSpec::resolve("simulate", &flags, "mf")?;
            set_threads(spec.threads)?;
            simulate::run(&spec)
        }
        Command::Figures(flags) => {
            let spec = RunSpec::resolve("figures", &flags, "thm1")?;
            set_threads(spec.threads)?;
            figures::run(&spec)
        }
        Command::Selfcheck(args) => {
            let spec = RunSpec::resolve("selfcheck", &args.flags, "all")?;
            set_threads(spec.threads)?;
            let out = args.flags.out.is_some().then(|| spec.out_dir()).transpose()?;
            selfcheck::run(&args.tol, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
