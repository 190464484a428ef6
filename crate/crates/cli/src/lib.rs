//! Library half of the `algebroid` command-line tool: configuration loading
//! and the three commands.

pub mod config;
pub mod run;

pub use config::{load, parse_config, ConfigError, Model};
pub use run::{cmd_check, cmd_describe, cmd_simulate, exit, Failure, RunReport, SimulateOutcome};
