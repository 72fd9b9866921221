//! Command-line front end: scenario files, pre-flight symmetry checks,
//! solves, exports, benchmarks and rollouts.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "symreach",
    version,
    about = "Backward reachable sets for discrete-time games, with symmetry reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify the symmetry, run the DP and write value fields, membership, policy and manifest.
    Solve(SolveArgs),
    /// Time reduced and baseline solves across grid densities.
    Bench(BenchArgs),
    /// Check group axioms, problem invariance and the moving frame.
    Verify(VerifyArgs),
    /// Simulate the stored policy against an adversary.
    Rollout(RolloutArgs),
    /// Convert a stored value raster to CSV.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Artifact directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub skip_verify: bool,
    /// Abort the solve after this many seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Allow full-space grids above the configured node ceiling.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid points per dimension, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5,11,51")]
    pub points: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub horizon: usize,
    /// Per-solve limit in seconds; slower entries print as `*`.
    #[arg(long, default_value_t = 7200.0)]
    pub timeout: f64,
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[command(flatten)]
    pub common: Common,
    /// Initial full state, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x0: Vec<f64>,
    /// `greedy`, `fixed:INDEX` or `random:SEED`.
    #[arg(long, default_value = "greedy")]
    pub adversary: String,
    /// Defaults to the horizon.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Trajectory CSV path; defaults to `rollout.csv` in the artifact directory.
    #[arg(long)]
    pub to: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Step `k` of the value field to export.
    #[arg(long, default_value_t = 0)]
    pub step: usize,
    /// Write `{J_k < threshold}` on the full-state grid instead of values,
    /// lifting reduced fields through the invariants.
    #[arg(long)]
    pub membership: bool,
    #[arg(long)]
    pub to: Option<PathBuf>,
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Bench(a) => commands::bench(a),
        Command::Verify(a) => commands::verify(a),
        Command::Rollout(a) => commands::rollout_cmd(a),
        Command::Export(a) => commands::export(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}
