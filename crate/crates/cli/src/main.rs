//! Experiment runner: JSON config in, reproducible artifact set out.

// Negated comparisons like `!(x < y)` reject NaN config values on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use config::{load, validate, ExperimentConfig};
use output::{config_hash, OutputSet};

#[derive(Parser)]
#[command(
    name = "anderson-lab",
    about = "Finite-volume experiments on multi-particle Anderson models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its artifact set.
    Run {
        config: PathBuf,
        /// Worker threads; the ANDERSON_LAB_WORKERS environment variable
        /// overrides this flag. Never affects output bytes.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config against the schema and cross-field constraints.
    Validate { config: PathBuf },
    /// Print the accepted configuration schema.
    EmitSchema,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn resolve_workers(flag: Option<usize>) -> Option<usize> {
    if let Some(v) = std::env::var("ANDERSON_LAB_WORKERS")
        .ok()
        .and_then(|text| text.parse::<usize>().ok())
        .filter(|&v| v > 0)
    {
        return Some(v);
    }
    flag
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<anderson_lab::Error>() {
        Some(anderson_lab::Error::DimensionCap { .. })
        | Some(anderson_lab::Error::BoxTooLarge { .. }) => 3,
        _ => 4,
    }
}

fn run(config_path: &Path, workers: Option<usize>, out_dir: Option<PathBuf>) -> ExitCode {
    let config: ExperimentConfig = match load(config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let report = validate(&config);
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if !report.ok() {
        for error in &report.errors {
            eprintln!("error: {error}");
        }
        return ExitCode::from(2);
    }
    let dir = out_dir
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let work = || -> anyhow::Result<()> {
        let started = unix_now();
        let mut outputs = OutputSet::new(&dir)?;
        let summary = experiments::run_experiment(&config, &mut outputs)?;
        outputs.write_json("summary.json", &summary)?;
        let hash = config_hash(&config)?;
        let manifest = outputs.finish(&hash, started, unix_now())?;
        println!("wrote {} artifacts to {}", manifest.files.len() + 1, dir.display());
        println!("config hash {hash}");
        Ok(())
    };

    let result = match resolve_workers(workers) {
        Some(threads) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("cannot build thread pool: {e}");
                    return ExitCode::from(4);
                }
            };
            pool.install(work)
        }
        None => work(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            workers,
            out,
        } => run(&config, workers, out),
        Command::Validate { config } => {
            // never fails hard: parse problems become report entries
            let report = match load(&config) {
                Ok(parsed) => validate(&parsed),
                Err(msg) => config::ValidationReport {
                    errors: vec![msg],
                    warnings: vec![],
                },
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::SUCCESS
        }
        Command::EmitSchema => {
            println!(
                "{}",
                serde_json::to_string_pretty(&config::schema_description()).unwrap()
            );
            ExitCode::SUCCESS
        }
    }
}
