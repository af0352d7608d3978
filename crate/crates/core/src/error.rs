use alloc::boxed::Box;
use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot split {len} values into {shards} nonempty shards")]
    InvalidPartition { len: usize, shards: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("shard {shard} is empty")]
    EmptyShard { shard: usize },

    #[error("value {value} lies outside [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("probability {0} is not in (0, 1)")]
    Probability(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("summaries cannot be merged: {0}")]
    Incompatible(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no bandwidth solves the neighborhood equation at x = {x}")]
    NoBandwidth { x: f64 },

    #[error("degenerate neighborhood at x = {x} (h = {h})")]
    DegenerateNeighborhood { x: f64, h: f64 },

    #[error("shard {shard}: {source}")]
    InShard {
        shard: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Strips shard context, returning the underlying failure.
    pub fn root(&self) -> &Error {
        match self {
            Error::InShard { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Probability(p))
    }
}
