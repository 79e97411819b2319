use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use beamcross::cli_io::{load_config, run_command, Command};

/// Monte Carlo simulator of particle transfer between two crossed
/// Gaussian-beam dipole traps.
#[derive(Parser)]
#[command(name = "beamcross", version)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the worker count (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Write vertical potential profiles for every configured separation.
    Profile,
    /// Classify the potential topology and barrier height per separation.
    Topology,
    /// Run the Monte Carlo sweep: histogram, efficiency curve, diagnostics.
    Sweep,
    /// Dump one seeded trajectory and its transit records.
    Trajectory,
}

fn run(cli: Cli) -> beamcross::Result<()> {
    let path = cli.config.ok_or_else(|| beamcross::Error::Config {
        key: "--config".to_string(),
        reason: "a configuration file is required".to_string(),
    })?;
    let mut config = load_config(&path)?;
    if let Some(seed) = cli.seed {
        config.sampler.seed = seed;
    }
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    let command = match cli.command {
        CliCommand::Profile => Command::Profile,
        CliCommand::Topology => Command::Topology,
        CliCommand::Sweep => Command::Sweep,
        CliCommand::Trajectory => Command::Trajectory,
    };
    for path in run_command(command, &config)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
