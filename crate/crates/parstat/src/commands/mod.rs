pub mod bench;
pub mod gen;
pub mod lowess;
pub mod quantile;

use clap::ValueEnum;
use parstat_core::datagen::Distribution;
use serde::Serialize;

use crate::engine::Engine;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dist {
    Uniform,
    Normal,
}

impl From<Dist> for Distribution {
    fn from(d: Dist) -> Self {
        match d {
            Dist::Uniform => Distribution::Uniform,
            Dist::Normal => Distribution::Normal,
        }
    }
}

/// Engine with `workers` threads, or the default count.
pub fn engine(workers: Option<usize>) -> CliResult<Engine> {
    let workers = workers.unwrap_or_else(Engine::default_workers);
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Engine::new(workers).map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

pub(crate) fn check_probabilities(ps: &[f64]) -> CliResult<()> {
    if ps.is_empty() {
        return Err(CliError::Usage("at least one probability is required".into()));
    }
    match ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        Some(p) => Err(CliError::Usage(format!("probability {p} is not in (0, 1)"))),
        None => Ok(()),
    }
}
