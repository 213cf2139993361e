//! `midec` — EEG motor-imagery decoding pipeline.
//!
//! Subcommands: `synth`, `features`, `train`, `eval`, `sweep-rewards`,
//! `rnac-demo`. Every command is driven by a JSON config plus flag overrides
//! (flags win) and is deterministic given (config, seed): re-running produces
//! byte-identical primary outputs.
//!
//! Exit codes: 0 success, 2 config/schema error, 3 I/O error, 4
//! data/dimension error, 5 numeric failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "midec", about = "EEG motor-imagery decoding pipeline", version)]
struct Cli {
    /// Path to the run configuration (JSON).
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for data-parallel feature extraction.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic recording with planted ground truth.
    Synth,
    /// Extract CSP + spectral/statistical features from a recording.
    Features,
    /// Train the DQN classifier on the training split.
    Train,
    /// Evaluate a checkpoint on the held-out split.
    Eval {
        /// Checkpoint path (default: <out_dir>/checkpoint.json).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train/evaluate once per benchmark reward structure.
    SweepRewards,
    /// Robust actor-critic on a tabular MDP fixture.
    RnacDemo {
        /// Fixture JSON ({n_states, n_actions, kernel, reward, gamma, rho}).
        #[arg(long)]
        fixture: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::load(&cli.config, cli.seed, cli.out.clone())?;
    match cli.command {
        Command::Synth => commands::cmd_synth(&config),
        Command::Features => commands::cmd_features(&config, cli.jobs.max(1)),
        Command::Train => commands::cmd_train(&config),
        Command::Eval { checkpoint } => commands::cmd_eval(&config, checkpoint),
        Command::SweepRewards => commands::cmd_sweep_rewards(&config),
        Command::RnacDemo { fixture } => commands::cmd_rnac_demo(&config, &fixture),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
