use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qss_core::experiment::{derive_seed, load_spec, run_experiment, ReportFormat, RunOptions};
use qss_core::protocol::{replay, run_protocol, Transcript};

/// Quantum secret sharing simulator.
#[derive(Parser)]
#[command(name = "qss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write its report.
    Run {
        spec: PathBuf,
        /// Override the spec file's seed_base.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the spec file's num_runs.
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
        /// Report destination; falls back to the spec file's report_path, then stdout.
        #[arg(long, env = "QSS_REPORT_PATH")]
        out: Option<PathBuf>,
    },
    /// Load and check a spec without running it.
    Validate { spec: PathBuf },
    /// Re-execute a logged run and compare event logs.
    Replay { transcript: PathBuf },
    /// Run a single configuration/run of a spec and write its transcript.
    Trace {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        config: usize,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Transcript destination (JSON lines); stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const CORRECTNESS_FAILURE: u8 = 1;
const USAGE_ERROR: u8 = 2;

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Run {
            spec,
            seed,
            runs,
            jobs,
            format,
            out,
        } => {
            let mut spec = load_spec(&spec).map_err(|e| e.to_string())?;
            if let Some(seed) = seed {
                spec.seed_base = seed;
            }
            if let Some(runs) = runs {
                spec.num_runs = runs;
            }
            let report = run_experiment(&spec, RunOptions { jobs }).map_err(|e| e.to_string())?;
            let path = out.or(spec.report_path);
            report
                .emit(format, path.as_deref())
                .map_err(|e| e.to_string())?;
            if report.correctness_failure {
                eprintln!(
                    "correctness failure: {} key-agreement violation(s), {} panicked run(s)",
                    report.key_agreement_violations(),
                    report.panics()
                );
                return Ok(ExitCode::from(CORRECTNESS_FAILURE));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { spec: path } => {
            let spec = load_spec(&path).map_err(|e| e.to_string())?;
            let configurations = spec.configurations().map_err(|e| e.to_string())?;
            println!(
                "{}: valid, {} configuration(s) x {} run(s)",
                path.display(),
                configurations.len(),
                spec.num_runs
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { transcript: path } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let transcript =
                Transcript::from_jsonl(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let check = replay(&transcript).map_err(|e| e.to_string())?;
            if check.identical() {
                println!(
                    "{}: {} events reproduced bit-identically",
                    path.display(),
                    check.logged
                );
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "{}: replay diverges at event {} ({} logged, {} replayed)",
                    path.display(),
                    check.first_divergence.map_or("-".into(), |s| s.to_string()),
                    check.logged,
                    check.replayed
                );
                Ok(ExitCode::from(CORRECTNESS_FAILURE))
            }
        }
        Command::Trace {
            spec,
            config,
            run,
            seed,
            out,
        } => {
            let spec = load_spec(&spec).map_err(|e| e.to_string())?;
            let configurations = spec.configurations().map_err(|e| e.to_string())?;
            let mut protocol = configurations
                .get(config)
                .ok_or_else(|| {
                    format!(
                        "configuration {config} out of range (spec has {})",
                        configurations.len()
                    )
                })?
                .config
                .clone();
            protocol.rng_seed = derive_seed(seed.unwrap_or(spec.seed_base), config, run);
            let outcome = run_protocol(&protocol).map_err(|e| e.to_string())?;
            let text = outcome.transcript.to_jsonl();
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            if outcome.key_agreement_violated() {
                return Ok(ExitCode::from(CORRECTNESS_FAILURE));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
