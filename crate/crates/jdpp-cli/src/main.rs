//! `jdpp`: batch driver for kernel validation, verification suites, moment
//! tables and exact sampling.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage, config or feasibility error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Format;

#[derive(Parser, Debug)]
#[command(name = "jdpp", version, about = "Verification driver for J-Hermitian determinantal point processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Comma-separated suite names, or `all`. Overrides the config.
    #[arg(long, global = true, value_delimiter = ',')]
    pub suite: Vec<String>,

    /// Report or sample destination. Defaults to the config's output path, then stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true)]
    pub count: Option<usize>,

    /// Write a Fock operator as sparse CSV triplets.
    #[arg(long, global = true)]
    pub dump_operator: Option<PathBuf>,

    /// Δ-tuple such as `{1}|{2,3}`; repeatable. Overrides the config's tuples.
    #[arg(long = "tuple", global = true)]
    pub tuples: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check that the kernel is a valid correlation operator and assemble 𝕂.
    Validate,
    /// Run the selected verification suites.
    Verify,
    /// Tabulate moment route values for Δ-tuples.
    Moments,
    /// Draw exact samples of the 𝕂-process.
    Sample,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
