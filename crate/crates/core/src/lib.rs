//! Embarrassingly parallel statistics over sharded data.
//!
//! Every estimator in this crate is answered from summaries that can be computed
//! independently on each shard and folded with an associative, commutative merge:
//!
//! - [`summary`]: count/sum/min/max, pooled standard deviation, least-squares
//!   accumulators, bin counts and the trigonometric moments `C̄_1..C̄_2J`.
//! - [`fourier`]: truncated Fourier expansions of `|x - θ|`, `1(x < θ)`, the
//!   quantile check loss and the interval indicator used for neighborhoods.
//! - [`quantile`]: approximate sample quantiles for any number of probabilities
//!   from a single [`TrigMomentSummary`], plus the sort oracle and a binning baseline.
//! - [`regression`]: local polynomial regression whose neighborhood half-width is
//!   the root of a Fourier-smoothed interval-mass equation.
//! - [`datagen`]: deterministic quantile-grid fixtures.
//!
//! The crate is `no_std` and only needs `alloc`. Transcendental functions come
//! from `libm`, so results are bit-identical across platforms. Parallel execution
//! is abstracted behind [`Executor`]; [`Sequential`] is the in-crate implementation.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod datagen;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod quantile;
pub mod regression;
pub mod shard;
pub mod sum;
pub mod summary;

pub use error::{Error, Result};
pub use fourier::FourierOrder;
pub use quantile::{QuantileRequest, QuantileSolution, RescaleMap};
pub use regression::{BandwidthMethod, BandwidthSolution, LocalFit, LowessConfig, Prediction};
pub use shard::{map_reduce, Executor, KernelId, MergeKernel, Mergeable, Sequential, ShardedDataset};
pub use sum::CompensatedSum;
pub use summary::{
    BinCountSummary, LsqSummary, MomentSummary, TrigMomentSummary, VarianceSummary,
};
