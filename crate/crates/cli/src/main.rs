//! `synergy`: runs every experiment and writes a manifest plus CSV results.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

/// Env var that overrides the default output directory.
pub const OUT_ENV: &str = "SYNERGY_OUT";

#[derive(Parser, Debug)]
#[command(name = "synergy", version, about = "Precision-dependent credit experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// master seed every stream is derived from
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// output directory
    #[arg(long, global = true, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    /// recorded trajectory CSV (D1_AM2_F1.csv)
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    /// use generated tracks instead of the recorded dataset
    #[arg(long, global = true)]
    pub synthetic: bool,
    /// flat `key = value` file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Credit against precision over a beta grid, with a quadratic fit
    Sweep(commands::SweepArgs),
    /// Closed-loop precision control on the prediction task
    ApcRun(commands::ApcRunArgs),
    /// Vicsek polarisation against perceptual precision
    VicsekSweep(commands::VicsekSweepArgs),
    /// Closed-loop precision control of a flock under rising noise
    VicsekApc(commands::VicsekApcArgs),
    /// Independent Q-learners with fixed, random and adaptive precision
    Marl(commands::MarlArgs),
    /// Deviation gains of the Gibbs coalition policy against N ln2 / beta
    NashCheck(commands::NashArgs),
    /// Uniform, difference-reward, Shapley and Harsanyi credit compared
    CreditBench(commands::CreditBenchArgs),
    /// Fast invariant checks across all modules
    Selftest,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = &cli.common;
    match cli.cmd {
        Command::Sweep(a) => commands::sweep(c, a),
        Command::ApcRun(a) => commands::apc_run(c, a),
        Command::VicsekSweep(a) => commands::vicsek_sweep(c, a),
        Command::VicsekApc(a) => commands::vicsek_apc(c, a),
        Command::Marl(a) => commands::marl(c, a),
        Command::NashCheck(a) => commands::nash_check(c, a),
        Command::CreditBench(a) => commands::credit_bench(c, a),
        Command::Selftest => commands::selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
