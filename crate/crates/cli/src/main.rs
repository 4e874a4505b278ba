//! `embevo` — run and validate embodied-evolution experiments.
//!
//! Exit codes: 0 success, 1 runtime/I-O failure, 2 configuration error.

use clap::{Parser, Subcommand};
use embevo_core::config::{ConfigError, ExperimentConfig};
use embevo_core::runner;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "embevo", about = "Embodied evolution for simulated robot collectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file.
    Run {
        /// Path to the experiment config (TOML).
        config: PathBuf,
        /// Override the base seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        /// Dump per-step robot trajectories (JSON lines).
        #[arg(long)]
        trajectories: bool,
        /// Run replicates sequentially instead of in parallel.
        #[arg(long)]
        sequential: bool,
    },
    /// Check a config file and print its resolved form.
    Validate {
        /// Path to the experiment config (TOML).
        config: PathBuf,
    },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    match ExperimentConfig::load(path) {
        Ok(cfg) => Ok(cfg),
        Err(err @ ConfigError::Io(_)) => {
            eprintln!("error: {err}");
            Err(ExitCode::from(1))
        }
        Err(err) => {
            eprintln!("error: {err}");
            Err(ExitCode::from(2))
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, std::io::Error> {
    match cli.command {
        Command::Version => {
            println!("embevo {}", env!("CARGO_PKG_VERSION"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(cfg) => cfg,
                Err(code) => return Ok(code),
            };
            print!("{}", cfg.to_resolved_toml());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, seed, out, replicates, trajectories, sequential } => {
            let mut cfg = match load(&config) {
                Ok(cfg) => cfg,
                Err(code) => return Ok(code),
            };
            if let Some(seed) = seed {
                cfg.seed = Some(seed);
            }
            if let Some(out) = out {
                cfg.out_dir = out.display().to_string();
            }
            if let Some(replicates) = replicates {
                cfg.replicates = replicates;
            }
            if trajectories {
                cfg.trajectories = true;
            }
            if let Err(err) = cfg.validate() {
                eprintln!("error: {err}");
                return Ok(ExitCode::from(2));
            }

            let root = PathBuf::from(&cfg.out_dir);
            let results = match runner::replicate_batch(&cfg, &root, !sequential) {
                Ok(results) => results,
                Err(err) => {
                    eprintln!("error: {err}");
                    return Ok(ExitCode::from(1));
                }
            };
            let mut failures = 0;
            for (i, result) in results.iter().enumerate() {
                match result {
                    Ok(run) => println!("{}", run.summary),
                    Err(err) => {
                        failures += 1;
                        eprintln!("replicate {i} failed: {err}");
                    }
                }
            }
            println!("outputs written under {}", root.display());
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
