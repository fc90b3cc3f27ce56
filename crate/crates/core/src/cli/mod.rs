//! Batch runner: configuration, pipeline execution and report writers.
//!
//! Exit statuses: 0 on completion, 2 when a configured criterion's
//! hypothesis is judged unsatisfied, 1 on any error.

mod catalog;
pub mod config;
pub mod runner;

pub use catalog::list_catalog;
pub use config::{LoadedConfig, RunConfig};
pub use runner::{run, RunOutcome, RunReport, SCHEMA_VERSION};
