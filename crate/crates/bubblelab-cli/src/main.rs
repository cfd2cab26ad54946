//! `bubblelab` command-line front end.
//!
//! Every subcommand reads a JSON run configuration, writes its artifacts
//! (CSV time series, JSON reports) into the output directory and prints the
//! main report to standard output. Failures print a JSON error object to
//! standard error and exit with 2 (invalid input) or 3 (numerical failure).

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bubblelab::config::RunConfig;
use bubblelab::{BubbleError, ErrorKind, Result};
use clap::{Parser, Subcommand};

/// Environment variable selecting the log level.
const LOG_ENV: &str = "BUBBLELAB_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "bubblelab",
    version,
    about = "Equilibria, dynamics, energy audits and spectra of a gas bubble in a viscous liquid shell"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Seed for randomized audits; overrides the configuration's seed.
    #[arg(long, global = true, value_name = "K")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the equilibrium (R†, ρ†) and report derived constants.
    Equilibrium,
    /// Integrate the configured perturbation; writes trajectory.csv,
    /// states.csv, energy.csv and summary.json.
    Simulate,
    /// Zeros of the characteristic function, decay bounds and the matrix
    /// cross-check; writes spectrum.json.
    Spectrum,
    /// Energy-dissipation audit of a trajectory CSV; writes audit.csv and
    /// audit.json (plus minimizer.csv when a configuration is given).
    Audit {
        /// Trajectory CSV written by `simulate`.
        trajectory: PathBuf,
    },
    /// Equilibrium, spectral abscissa and ϖ along the configured sweep axis;
    /// writes sweep.csv and one JSON file per point under sweep/.
    Sweep,
}

/// Prints a machine-readable error and returns the matching exit code.
fn fail(err: &BubbleError) -> ExitCode {
    log::debug!("{err:?}");
    eprintln!("{}", err.to_json());
    match err.kind() {
        ErrorKind::Validation => ExitCode::from(2),
        ErrorKind::Numerical => ExitCode::from(3),
    }
}

fn init_logging() -> Result<()> {
    let level = match std::env::var(LOG_ENV) {
        Err(_) => log::LevelFilter::Warn,
        Ok(v) => match v.as_str() {
            "error" => log::LevelFilter::Error,
            "warn" => log::LevelFilter::Warn,
            "info" => log::LevelFilter::Info,
            "debug" => log::LevelFilter::Debug,
            other => {
                return Err(BubbleError::field(
                    LOG_ENV,
                    format!("unknown log level \"{other}\" (expected error, warn, info or debug)"),
                ))
            }
        },
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => Some(RunConfig::from_path(path)?),
        None => None,
    };
    let need_config = || {
        config
            .clone()
            .ok_or_else(|| BubbleError::field("config", "this subcommand needs --config <path>"))
    };
    let ctx = commands::Context {
        out: cli.out.clone(),
        workers: cli.workers,
        seed: cli.seed,
    };
    let report = match cli.command {
        Command::Equilibrium => commands::equilibrium(&need_config()?, &ctx)?,
        Command::Simulate => commands::simulate(&need_config()?, &ctx)?,
        Command::Spectrum => commands::spectrum(&need_config()?, &ctx)?,
        Command::Audit { trajectory } => commands::audit(&trajectory, config.as_ref(), &ctx)?,
        Command::Sweep => commands::sweep(&need_config()?, &ctx)?,
    };
    // A closed stdout (e.g. piped into `head`) is not an error of the run.
    let _ = writeln!(std::io::stdout().lock(), "{}", output::pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(&BubbleError::Parse(e.to_string().trim().to_string()));
        }
    };
    if let Err(e) = init_logging() {
        return fail(&e);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
