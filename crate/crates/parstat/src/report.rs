//! JSON run reports.
//!
//! Floats are written in the shortest decimal form that parses back to the
//! same bits, so re-reading a report reproduces every number exactly.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::PhaseTimings;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub rows: Vec<Value>,
    pub timings: PhaseTimings,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            params: BTreeMap::new(),
            rows: Vec::new(),
            timings: PhaseTimings::default(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(key.to_owned(), to_value(value));
        self
    }

    pub fn push_row(&mut self, row: impl Serialize) {
        self.rows.push(to_value(row));
    }

    /// The report with timings zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: PhaseTimings::default(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes the report to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> CliResult<()> {
        let text = self.to_json();
        match path {
            Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::io(p.display().to_string(), e)),
            None => writeln!(std::io::stdout().lock(), "{text}").map_err(|e| CliError::io("stdout", e)),
        }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}
