//! Experiment front end for `quench-core`: configuration, command drivers
//! and deterministic report output.

pub mod commands;
pub mod config;
pub mod reference;
pub mod report;

use thiserror::Error;

pub use commands::{execute, Command};
pub use config::ExperimentConfig;
pub use report::Report;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for numerical failures: unstable step, exhausted budget,
/// failed sweep rows.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

impl From<quench_core::Error> for CliError {
    fn from(e: quench_core::Error) -> Self {
        use quench_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::UnsupportedDomain(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
