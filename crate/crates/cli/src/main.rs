//! `latticelab`: verification suites, covering curves and compactness
//! profiles driven by a JSON experiment config.
//!
//! Exit codes: 0 on success, 1 when a suite or a cell fails, 2 when the
//! config (or the command line) cannot be resolved.

mod commands;
mod config;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::config::ConfigError;

#[derive(Debug, Parser)]
#[command(
    name = "latticelab",
    version,
    about = "Lattice norm, covering and compactness experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run identity and invariant suites and write verify_report.json.
    Verify(Common),
    /// Covering curves of both semimetrics of a bilinear system, plus a net audit.
    Covering(Common),
    /// Covering numbers of the image of the interpolated unit ball.
    Compactness(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides the config's "out".
    #[arg(long, value_name = "DIR", env = "LATTICELAB_OUT")]
    out: Option<PathBuf>,
    /// Restrict `verify` to these suites (repeatable).
    #[arg(long = "suite", value_name = "NAME")]
    suites: Vec<String>,
    /// Override the sampler seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(c) => commands::verify(&c.config, c.out, &c.suites, c.seed),
        Command::Covering(c) => commands::covering(&c.config, c.out, c.seed),
        Command::Compactness(c) => commands::compactness(&c.config, c.out, c.seed),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
