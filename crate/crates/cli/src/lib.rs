//! Experiment runner for the coinflip asset game: JSON configs, presets for
//! the initial-distribution and payment-rule comparisons, and CSV/JSON
//! output for offline plotting.

pub mod config;
pub mod error;
pub mod experiment;

pub use config::{parse_config, parse_config_with, ExperimentSpec, Overrides, Preset};
pub use error::CliError;
pub use experiment::{run_experiment, Summary};
