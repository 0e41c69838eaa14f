//! Command-line front end for multi-trajectory smoothing: data generation,
//! fitting, and the experiment harness.
//!
//! Exit codes: 0 on success, 2 on input problems (config, CSV schema,
//! invalid parameters), 3 on numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sda_core::Error as CoreError;

mod commands;
mod config;
mod report;

use config::Config;

#[derive(Debug)]
pub enum CliError {
    /// Bad configs, malformed files, invalid parameters. Exit code 2.
    Input(String),
    /// The computation itself failed. Exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn input(msg: String) -> Self {
        CliError::Input(msg)
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Numeric(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Numerical(_)
            | CoreError::Quadrature(_)
            | CoreError::EmptyCluster
            | CoreError::DegenerateDesign { .. } => CliError::Numeric(err.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sda",
    version,
    about = "Fit multiple trajectory centers to unlabeled space-time observations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: SDA_THREADS or all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Fail on unknown config keys
    #[arg(long, global = true)]
    strict: bool,

    /// Override the command's seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a dataset from the configured generating model
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Dataset CSV path; a .meta sidecar records seed and model hash
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit trajectory centers to a dataset CSV
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Fitted-tracks CSV path; a .report sidecar carries diagnostics
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence-rate study against a large-sample reference fit
    RateStudy {
        #[arg(long)]
        config: PathBuf,
        /// Per-run CSV path; a .summary sidecar carries the fitted slope
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the analytic population derivative with central differences
    GradCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical-to-population objective convergence study
    GammaCheck {
        #[arg(long)]
        config: PathBuf,
        /// Per-replicate CSV path; a .summary sidecar carries the slope
        #[arg(long)]
        out: PathBuf,
    },
}

fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| {
        std::env::var("SDA_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate { config, out } => {
            let config = Config::load(config, cli.strict)?;
            commands::generate(&config, out, cli.seed)
        }
        Command::Fit { config, data, out } => {
            let config = Config::load(config, cli.strict)?;
            commands::fit(&config, data, out, cli.seed)
        }
        Command::RateStudy { config, out } => {
            let config = Config::load(config, cli.strict)?;
            commands::rate_study(&config, out, cli.seed)
        }
        Command::GradCheck { config, out } => {
            let config = Config::load(config, cli.strict)?;
            commands::grad_check(&config, out, cli.seed)
        }
        Command::GammaCheck { config, out } => {
            let config = Config::load(config, cli.strict)?;
            commands::gamma_check(&config, out, cli.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = thread_count(cli.threads) {
        // a second init in the same process is harmless; results never
        // depend on the pool size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
