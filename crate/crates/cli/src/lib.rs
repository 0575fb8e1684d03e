//! Config-driven experiment runner for the Schottky engine.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Outcome, Subcommand};
pub use config::{load_config, parse_config, parse_config_with_overrides, ExperimentConfig};
pub use error::CliError;
