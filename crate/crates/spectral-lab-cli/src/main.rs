//! `spectral-lab`: config-driven experiment runner.
//!
//! Exit codes: 0 on success, 1 on validation failure, 2 on computation
//! error. `SPECTRAL_LAB_THREADS` caps worker-pool parallelism.

// negated float comparisons are deliberate: they reject NaN parameters
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "spectral-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write its CSV output.
    Run(RunArgs),
    /// Check a config without computing anything; prints diagnostics.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Experiment name (overrides the config's `experiment`).
    #[arg(long)]
    experiment: Option<String>,
    /// Suppress the run report on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Experiment name (overrides the config's `experiment`).
    #[arg(long)]
    experiment: Option<String>,
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("SPECTRAL_LAB_THREADS") {
        match value.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("ignoring SPECTRAL_LAB_THREADS={value}: not a positive integer"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    match cli.command {
        Command::Validate(args) => {
            let doc = match config::load_doc(&args.config) {
                Ok(doc) => doc,
                Err(message) => {
                    eprintln!("{message}");
                    return ExitCode::from(1);
                }
            };
            let dir = args
                .config
                .parent()
                .map(PathBuf::from)
                .unwrap_or_default();
            let (_, diags) = config::resolve(&doc, &dir, args.experiment.as_deref(), None);
            if diags.is_empty() {
                println!("config is valid");
                ExitCode::SUCCESS
            } else {
                for d in &diags {
                    println!("{d}");
                }
                ExitCode::from(1)
            }
        }
        Command::Run(args) => {
            let doc = match config::load_doc(&args.config) {
                Ok(doc) => doc,
                Err(message) => {
                    eprintln!("{message}");
                    return ExitCode::from(1);
                }
            };
            let dir = args
                .config
                .parent()
                .map(PathBuf::from)
                .unwrap_or_default();
            let (resolved, diags) = config::resolve(
                &doc,
                &dir,
                args.experiment.as_deref(),
                args.out.as_deref(),
            );
            let Some(resolved) = resolved else {
                for d in &diags {
                    eprintln!("{d}");
                }
                return ExitCode::from(1);
            };
            match runner::run(&resolved) {
                Ok(record) => {
                    if !args.quiet {
                        println!(
                            "spectral-lab {}: wrote {} rows to {} in {} ms (config sha256:{})",
                            record.version,
                            record.rows,
                            resolved.out.display(),
                            record.wall_ms,
                            &record.config_hash[..16]
                        );
                        println!("summary: {}", record.summary);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("computation failed: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
