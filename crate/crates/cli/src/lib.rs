//! Scenario files, CSV reports, and the command implementations for the
//! crowd egress simulator's command-line front end.

pub mod commands;
pub mod report;
pub mod scenario_file;

pub use commands::{cmd_analyze, cmd_run, cmd_sweep, CliError, SweepConfig};
pub use scenario_file::{make_corridor_scenario, parse_scenario, serialize_scenario, ParseError};
