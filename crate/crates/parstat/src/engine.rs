//! Thread-pool executor and phase timing.

use std::time::Instant;

use parstat_core::shard::{fold, map_shards};
use parstat_core::{Executor, MergeKernel, ShardedDataset};
use rayon::prelude::*;
use rayon::ThreadPool;

/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "PARSTAT_WORKERS";

/// A fixed-size worker pool.
///
/// Results never depend on the worker count: maps return in input order and
/// reductions fold shard summaries in shard order.
pub struct Engine {
    pool: ThreadPool,
    workers: usize,
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Self { pool, workers })
    }

    /// `PARSTAT_WORKERS` if set and valid, otherwise the available parallelism.
    pub fn default_workers() -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// [`map_reduce`](parstat_core::map_reduce) with the two phases timed separately.
    pub fn map_reduce_timed<T, K>(
        &self,
        ds: &ShardedDataset<T>,
        kernel: &K,
        timings: &mut PhaseTimings,
    ) -> parstat_core::Result<K::Summary>
    where
        T: Sync,
        K: MergeKernel<T>,
    {
        let start = Instant::now();
        let parts = map_shards(ds, kernel, self)?;
        timings.map_ms += elapsed_ms(start);
        let start = Instant::now();
        let out = fold(&parts);
        timings.reduce_ms += elapsed_ms(start);
        out
    }
}

impl Executor for Engine {
    fn map<I, O, F>(&self, items: &[I], f: F) -> Vec<O>
    where
        I: Sync,
        O: Send,
        F: Fn(usize, &I) -> O + Sync + Send,
    {
        if self.workers == 1 {
            return items.iter().enumerate().map(|(i, item)| f(i, item)).collect();
        }
        self.pool
            .install(|| items.par_iter().enumerate().map(|(i, item)| f(i, item)).collect())
    }
}

/// Wall-clock milliseconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhaseTimings {
    pub map_ms: f64,
    pub reduce_ms: f64,
    pub solve_ms: f64,
}

impl PhaseTimings {
    pub fn add(&mut self, other: &PhaseTimings) {
        self.map_ms += other.map_ms;
        self.reduce_ms += other.reduce_ms;
        self.solve_ms += other.solve_ms;
    }
}

pub fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}
