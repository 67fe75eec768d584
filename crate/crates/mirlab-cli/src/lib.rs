//! Command-line harness around the `mirlab` library: family generation,
//! classifier training, full-vs-reduced comparison, and figure-ready
//! aggregation, all emitting schema-versioned CSV/JSON artifacts.

pub mod artifacts;
pub mod commands;

pub use commands::{
    cmd_compare, cmd_generate, cmd_report, cmd_train, CliError, ExperimentConfig,
};
