//! `plapreg` command-line driver.
//!
//! Exit codes: 0 success / all verdicts pass, 1 compute failure, unconverged
//! solve or failed verdict, 2 usage error.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Parser)]
#[command(
    name = "plapreg",
    version,
    about = "Regularized p-Laplace solves, smoothness estimates and verification suites"
)]
struct Cli {
    /// JSON file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "PLAPREG_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the regularized energy; writes result.json, u.csv, grid.json, trace.csv.
    Solve(Settings),
    /// Nikol'skii seminorm and fitted exponent of a field; writes seminorm.json, shifts.csv.
    Estimate(Settings),
    /// eps-sweep of the transformed W^{1,2} norm; writes report.json, sweep.csv.
    Sweep(Settings),
    /// Run a verification suite; writes report.json plus CSV tables.
    Verify(Settings),
}

#[derive(Debug)]
pub struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    match threads {
        Some(0) => Err(usage("PLAPREG_THREADS must be at least 1")),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}")),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    init_threads(cli.threads)?;
    let file = match &cli.config {
        Some(path) => Settings::load(path).map_err(|e| usage(format!("{e:#}")))?,
        None => Settings::default(),
    };
    match cli.command {
        Command::Solve(s) => commands::solve(&s.merged(file)),
        Command::Estimate(s) => commands::estimate(&s.merged(file)),
        Command::Sweep(s) => commands::sweep(&s.merged(file)),
        Command::Verify(s) => commands::verify(&s.merged(file)),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
