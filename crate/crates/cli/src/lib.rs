//! Command-line driver for the degenerate taxis simulator: configuration
//! parsing, run orchestration and artifact emission.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod series;
pub mod snapshot;

pub use commands::main_with;
pub use config::{parse_config, ConfigError, RunConfig};
