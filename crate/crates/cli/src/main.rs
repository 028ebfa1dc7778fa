//! Command-line front end: batch subcommands over the library, one JSON
//! config document per invocation, CSV/JSON/SVG outputs with manifests.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 config error, 3 simulation
//! abort, 4 resource bound.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::CliFailure;

#[derive(Parser)]
#[command(
    name = "brwlab",
    version,
    about = "Branching random walk laboratory: rate functions, exact oracles and reproducible Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for replica fan-out (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulates rate curves into rates.csv and rates.svg.
    Rates,
    /// Runs a Monte Carlo engine and writes per-replica outputs.
    Simulate,
    /// Estimates threshold-event probabilities with exact intervals.
    Estimate,
    /// Writes exact lattice CDFs of both maxima.
    Oracle,
    /// Runs the full verification suite and reports per-criterion status.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("config error: cannot build {workers}-thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("io error: cannot create output directory: {e}");
        return ExitCode::from(4);
    }

    let simulation_context = matches!(cli.command, Command::Simulate | Command::Estimate);
    let result = match cli.command {
        Command::Verify => return commands::verify::run(cli.seed, &out_dir),
        Command::Rates => commands::rates::run(&cli, &out_dir),
        Command::Simulate => commands::simulate::run(&cli, &out_dir),
        Command::Estimate => commands::estimate::run(&cli, &out_dir),
        Command::Oracle => commands::oracle::run(&cli, &out_dir),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.exit_code(simulation_context) as u8)
        }
    }
}

impl Cli {
    /// Loads and parses the config document; commands other than `verify`
    /// require one.
    fn load_config(&self) -> Result<config::RunConfigFile, CliFailure> {
        let path = self.config.as_ref().ok_or_else(|| {
            CliFailure::Config(config::ConfigError("--config <path> is required".into()))
        })?;
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliFailure::Config(config::ConfigError(format!(
                "cannot read {}: {e}",
                path.display()
            )))
        })?;
        Ok(config::parse_config(&text)?)
    }

    fn effective_seed(&self, file: &config::RunConfigFile) -> u64 {
        self.seed.or(file.seed).unwrap_or(0)
    }
}
