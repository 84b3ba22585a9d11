//! Command-line harness: configuration, runs, reports.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod verify;

pub use config::{Overrides, Settings};
pub use error::{CliError, CliResult};
pub use report::{CheckOutcome, RunReport, Timings};
