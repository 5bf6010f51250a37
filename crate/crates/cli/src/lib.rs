//! Experiment runner for the iclab learners: config parsing, the scenario
//! registry, CSV/JSON output and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod emit;
pub mod error;
pub mod run;
pub mod scenarios;

pub use config::{parse_config, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use scenarios::{run_scenario, ScenarioOutput};
