//! `fso-sim`: runs link sweeps, prints link budgets and self-checks.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for runtime failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fso_core::sim::{self, OutputFormat, RunConfig};
use fso_core::Error;

#[derive(Parser)]
#[command(
    name = "fso-sim",
    version,
    about = "CPDM coherent-optical OFDM free-space link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo sweep and write result files.
    Run {
        /// TOML run configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides `master_seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per cell (overrides `trials`).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the deterministic link budget for every cell.
    Budget {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run quick internal consistency checks.
    Selftest,
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => sim::load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigFile(_) | Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Io { .. } | Error::Framing(_) | Error::Cell { .. } => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            trials,
            format,
            workers,
        } => {
            let mut cfg = load(config.as_ref())?;
            if let Some(s) = seed {
                cfg.master_seed = s;
                cfg.system.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            if let Some(f) = format {
                cfg.format = match f {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                };
            }
            cfg.validate()?;
            let results = sim::run_sweep_with(&cfg, workers)?;
            print!("{}", sim::format_results_table(&results.records));
            let files = sim::emit_outputs(&results, &cfg, &cfg.output_dir)?;
            eprintln!("wrote {} files to {}", files.len(), cfg.output_dir.display());
        }
        Command::Budget { config } => {
            let cfg = load(config.as_ref())?;
            print!("{}", sim::format_budget_table(&sim::budget_reports(&cfg)?));
        }
        Command::Selftest => {
            let checks = sim::run_selftest();
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(Error::Framing("self-test failed".into()));
            }
        }
        Command::DefaultConfig => print!("{}", RunConfig::default().to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
