//! Scenario files, result files and the commands behind the `holstein`
//! binary.

pub mod error;
pub mod output;
pub mod presets;
pub mod run;
pub mod scenario;
pub mod spectral;

pub use error::CliError;
pub use scenario::{parse_scenario, Scenario, ScenarioDoc};
