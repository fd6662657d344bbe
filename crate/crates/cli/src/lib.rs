//! Batch front end: configuration loading, command dispatch and reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use opphunt_core::{EngineError, EquilibriumError, PayoffError, StrategyError};
use thiserror::Error;

pub use commands::{run_command, Artifacts, Command};
pub use config::{load_config, Format, RunConfig, SCHEMA_VERSION};

/// Exit status for validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status when `verify` refutes the candidate.
pub const EXIT_REFUTED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at `{field}` (line {line}, column {column}): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Payoff(#[from] PayoffError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigIo { .. } | CliError::Parse { .. } | CliError::Validation { .. } => EXIT_VALIDATION,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "opphunt", version, about = "Simulate and analyze the opportunity-hunting game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// JSON run configuration (optional for demo-zeno).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides sim.master_seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides sim.replications.
    #[arg(long, global = true)]
    pub replications: Option<u64>,
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the config's output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Sub {
    /// Batch statistics of simulated plays.
    Simulate {
        /// Also write every play in history text form.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Per-cycle quantities and fixed-point values of a Markov pair.
    Evaluate,
    /// Check a Markov pair against the deviation family.
    Verify,
    /// Best Markov response and extraction for player 1.
    Respond,
    /// The two-cascade example history and the cost diagnosis of its strategy.
    DemoZeno,
}

impl Cli {
    pub fn command(&self) -> Command {
        match &self.command {
            Sub::Simulate { traces } => Command::Simulate {
                traces: traces.is_some(),
            },
            Sub::Evaluate => Command::Evaluate,
            Sub::Verify => Command::Verify,
            Sub::Respond => Command::Respond,
            Sub::DemoZeno => Command::DemoZeno,
        }
    }

    /// Loads the config (or the demo defaults) and applies flag overrides.
    pub fn effective_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, &self.command) {
            (Some(path), _) => load_config(path)?,
            (None, Sub::DemoZeno) => RunConfig::zeno_demo().finalize()?,
            (None, _) => {
                return Err(CliError::Validation {
                    field: "--config".into(),
                    reason: "required for this command".into(),
                })
            }
        };
        if let Some(seed) = self.seed {
            cfg.sim.master_seed = seed;
        }
        if let Some(n) = self.replications {
            cfg.sim.replications = n;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.finalize()
    }
}
