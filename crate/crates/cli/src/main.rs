//! `milstein`: simulations, exponent estimates, Δt-sweeps, stability regions
//! and verification suites.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid
//! configuration or estimator precondition, 3 I/O failure.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, FileConfig};
use crate::error::CliError;

fn run(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(file.threads);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::invalid("threads", "must be positive"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config {
        kind: "thread_pool",
        message: e.to_string(),
    })?;
    pool.install(|| commands::run(&cli.command, &file))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
