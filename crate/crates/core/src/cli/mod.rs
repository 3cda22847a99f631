//! Batch front end: configuration files, subcommands, CSV artifacts.

mod config;
mod run;

pub use config::{parse_config, ConfigError, RunConfig, TimeGrid, DEFAULT_RADIUS, KEYS};
pub use run::{exit, init_threads, run, Subcommand};
