//! Batch front end for the solvers in `painleve_core`.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Context;
pub use config::RunConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "painleve", version, about = "Painlevé and Ginzburg-Landau solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration (defaults apply when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (overrides `output_dir` in the config; default `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Suppress progress messages.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the one-dimensional boundary value problem; writes h.csv.
    Hm,
    /// Solve the two-dimensional connecting problem; writes y.csv.
    Connect,
    /// Minimize the energy along the ε list; writes u_eps*.csv.
    Gl,
    /// Sample the rescaled profile of y.csv; writes profile.csv.
    Rescale,
    /// Evaluate every check on the saved fields; writes report.json.
    Verify,
}

/// Run one parsed invocation and return its exit status.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context { out, quiet: cli.quiet };
    match cli.command {
        Command::Hm => commands::run_hm(&cfg, &ctx),
        Command::Connect => commands::run_connect(&cfg, &ctx),
        Command::Gl => commands::run_gl(&cfg, &ctx),
        Command::Rescale => commands::run_rescale(&cfg, &ctx),
        Command::Verify => commands::run_verify(&cfg, &ctx).map(|_| ()),
    }
}
