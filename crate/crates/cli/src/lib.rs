//! Config-driven experiment runner for `akns-lab`.

pub mod commands;
pub mod config;
pub mod error;
pub mod selftest;

pub use config::{ExperimentConfig, FORMAT};
pub use error::{CliError, EXIT_NUMERICAL, EXIT_OK, EXIT_PROPERTY, EXIT_USAGE};
