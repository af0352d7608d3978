//! Local parallel execution, CSV ingestion and reports on top of `parstat-core`.
//!
//! The [`commands`] module holds the logic behind each subcommand of the
//! `parstat` binary so that it can be driven from tests without spawning a
//! process.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod engine;
pub mod error;
pub mod ingest;
pub mod report;

pub use engine::{Engine, PhaseTimings};
pub use error::{CliError, CliResult};
pub use report::RunReport;
