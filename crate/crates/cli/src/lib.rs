//! Command-line front end for the `eposit` library: simulate helix runs,
//! solve poses from correspondence files, run the benchmark and render SVG
//! plots.
//!
//! Each subcommand is a plain function taking its parsed flags, so tests can
//! call it without spawning the binary.

pub mod args;
pub mod bench;
pub mod commands;
pub mod plot;

use eposit::io_formats::FormatError;
use eposit::{DomainError, SolveError};
use thiserror::Error;

pub use commands::{cmd_bench, cmd_plot, cmd_simulate, cmd_solve};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EPOSIT_OUT_DIR";

/// Process exit statuses.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    /// Bad flags or invalid input values.
    pub const USAGE: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const SINGULAR: i32 = 4;
    pub const DIVERGED: i32 = 5;
    pub const DOMAIN: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => exit_code::USAGE,
            CliError::Format(FormatError::Validation(_) | FormatError::Parse { .. }) => exit_code::USAGE,
            CliError::Solve(SolveError::NotConverged { .. }) => exit_code::NOT_CONVERGED,
            CliError::Solve(SolveError::SingularConfiguration { .. }) => exit_code::SINGULAR,
            CliError::Solve(SolveError::Diverged { .. }) => exit_code::DIVERGED,
            CliError::Solve(SolveError::Domain(_)) | CliError::Domain(_) => exit_code::DOMAIN,
            CliError::Solve(SolveError::InvalidInput(_)) => exit_code::USAGE,
            _ => exit_code::FAILURE,
        }
    }
}
