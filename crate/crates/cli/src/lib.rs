//! Scenario-file front end for `bridgeland-local`: loading and validating
//! scenarios, dispatching commands and emitting deterministic reports.

pub mod commands;
pub mod error;
pub mod scenario;

pub use commands::{run_command, Report, RunOptions, COMMANDS};
pub use error::CliError;
pub use scenario::{load_scenario, load_scenario_file, Scenario, SchemaViolation};
