//! `irs-sweep`: runs a Monte-Carlo parameter sweep described by a TOML file.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when more runs
//! than the configured failure budget ended in a solver failure, 1 for
//! anything else (I/O). Log verbosity follows `RUST_LOG`.

use beamforming::experiment::{emit, render, run_sweep, ExperimentError, Format, SweepConfig};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "irs-sweep", version, about = "Robust IRS beamforming sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep in a config file and write one row per axis value and mode.
    Sweep {
        /// TOML sweep configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Format {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn fail(e: &ExperimentError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        ExperimentError::Config(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::FAILURE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Sweep {
        config,
        out,
        format,
        seed,
        trials,
    } = Cli::parse().command;

    let mut cfg = match SweepConfig::from_file(&config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    let result = match run_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let written = match &out {
        Some(path) => emit(&result, format.into(), path),
        None => render(&result, format.into()).map(|text| print!("{text}")),
    };
    if let Err(e) = written {
        return fail(&e);
    }

    let failures = result.solver_failures();
    let allowed = cfg.failure_budget * result.total_runs() as f64;
    log::info!("{} runs, {failures} solver failures", result.total_runs());
    if failures as f64 > allowed {
        eprintln!(
            "solver failures: {failures} of {} runs exceed the budget of {allowed:.1}",
            result.total_runs()
        );
        return ExitCode::from(EXIT_BUDGET);
    }
    ExitCode::SUCCESS
}
