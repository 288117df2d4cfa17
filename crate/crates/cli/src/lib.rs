//! Batch front-end for the coopsense experiments.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{execute, Outcome, Status};
