//! Library side of the `fracfbm` binary: argument types, config files,
//! artifact writers and the command implementations.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod suites;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FRACFBM_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config; exit 2.
    Usage(String),
    /// A verification or ensemble failure; exit 1.
    Failure(String),
    /// Picard iteration did not converge; exit 3.
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Failure(_) => 1,
            Self::Usage(_) => 2,
            Self::NonConvergence(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Failure(m) | Self::NonConvergence(m) => f.write_str(m),
        }
    }
}

impl From<fracfbm_core::Error> for CliError {
    fn from(e: fracfbm_core::Error) -> Self {
        use fracfbm_core::Error;
        match e {
            Error::NonConvergence { .. } => Self::NonConvergence(e.to_string()),
            Error::NonFiniteField { .. } | Error::NotPositiveDefinite(_) => Self::Failure(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracfbm", version, about = "Pathwise fractional calculus and an FBM-driven Picard solver")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $FRACFBM_OUT_DIR, else the working directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one fBm path on [0, 1]; optionally validate the covariance law.
    Fbm {
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Monte Carlo paths for the validator.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write covariance_report.json.
        #[arg(long)]
        validate: bool,
        /// Exit 1 when a z-score exceeds the limit.
        #[arg(long, requires = "validate")]
        strict: bool,
    },
    /// Solve the configured equation; writes solution.csv and report.json.
    Solve { config: PathBuf },
    /// Run a verification suite; writes verify_<suite>.json.
    Verify {
        suite: suites::Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve once per split seed of an FBM-driven config.
    Ensemble {
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Spatial refinement study against the finest resolution (stub drivers only).
    Convergence {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
    },
}

impl Cli {
    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Runs the command inside a pool of at most `--threads` workers.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Failure(e.to_string()))?;
        return pool.install(|| commands::dispatch(cli));
    }
    commands::dispatch(cli)
}
