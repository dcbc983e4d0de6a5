//! Declarative runner for `phiprod` checks.
//!
//! A JSON [`config::RunConfig`] names spaces, gluing functions and curves,
//! then lists checks; [`runner::run_config`] executes them in order and
//! produces one [`runner::Record`] per condition checked.

pub mod commands;
pub mod config;
pub mod demos;
pub mod runner;
pub mod shorthand;

pub use config::{OutputMode, RunConfig, ToleranceOverrides};
pub use runner::{run_config, Outcome, Record, RunOptions};

use thiserror::Error;

/// Errors that abort a run. Check-level failures are records, not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A check could not be evaluated; the runner turns this into an undetermined record.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    /// Process exit status for an aborted run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Check(_) => EXIT_FAILURE,
        }
    }
}

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// The suite exercised by `phiprod run` on the bundled config and by the determinism check.
pub const FULL_SUITE: &str = include_str!("../suites/full.json");
