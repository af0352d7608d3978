//! Partitioned datasets and the map-reduce execution contract.
//!
//! A kernel summarizes each shard independently (the map step); the shard
//! summaries are then folded in shard order with an associative, commutative
//! merge (the reduce step). Because the fold order is fixed, the result does not
//! depend on how an [`Executor`] schedules the map step.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Where the values of a [`ShardedDataset`] came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Source {
    #[default]
    InMemory,
    Files(Vec<String>),
}

/// Data split into disjoint, exhaustive, nonempty contiguous blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardedDataset<T> {
    shards: Vec<Vec<T>>,
    total_count: usize,
    source: Source,
}

impl<T> ShardedDataset<T> {
    /// Splits `values` into `shards` contiguous blocks whose sizes differ by at
    /// most one; the first `len % shards` blocks carry the extra element.
    pub fn partition(values: Vec<T>, shards: usize) -> Result<Self> {
        let len = values.len();
        if shards == 0 || shards > len {
            return Err(Error::InvalidPartition { len, shards });
        }
        let base = len / shards;
        let extra = len % shards;
        let mut blocks = Vec::with_capacity(shards);
        let mut rest = values.into_iter();
        for r in 0..shards {
            let size = base + usize::from(r < extra);
            blocks.push(rest.by_ref().take(size).collect());
        }
        Ok(Self {
            shards: blocks,
            total_count: len,
            source: Source::InMemory,
        })
    }

    /// Wraps pre-split blocks. Every block must be nonempty.
    pub fn from_shards(shards: Vec<Vec<T>>, source: Source) -> Result<Self> {
        if shards.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Some(shard) = shards.iter().position(Vec::is_empty) {
            return Err(Error::EmptyShard { shard });
        }
        let total_count = shards.iter().map(Vec::len).sum();
        Ok(Self {
            shards,
            total_count,
            source,
        })
    }

    pub fn shards(&self) -> &[Vec<T>] {
        &self.shards
    }

    pub fn shard_count(&self) -> usize {
        self.shards.len()
    }

    pub fn total_count(&self) -> usize {
        self.total_count
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    /// Values in their original order.
    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        self.shards.iter().flatten()
    }

    pub fn into_shards(self) -> Vec<Vec<T>> {
        self.shards
    }
}

impl<T: Clone> ShardedDataset<T> {
    pub fn to_vec(&self) -> Vec<T> {
        self.iter().cloned().collect()
    }
}

/// Runs a function over a slice of independent work items.
///
/// Implementations may evaluate items concurrently but must return outputs in
/// item order.
pub trait Executor: Sync {
    fn map<I, O, F>(&self, items: &[I], f: F) -> Vec<O>
    where
        I: Sync,
        O: Send,
        F: Fn(usize, &I) -> O + Sync + Send;
}

/// Evaluates items one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<I, O, F>(&self, items: &[I], f: F) -> Vec<O>
    where
        I: Sync,
        O: Send,
        F: Fn(usize, &I) -> O + Sync + Send,
    {
        items.iter().enumerate().map(|(i, item)| f(i, item)).collect()
    }
}

impl<E: Executor + ?Sized> Executor for &E {
    fn map<I, O, F>(&self, items: &[I], f: F) -> Vec<O>
    where
        I: Sync,
        O: Send,
        F: Fn(usize, &I) -> O + Sync + Send,
    {
        (**self).map(items, f)
    }
}

/// A summary with an associative, commutative merge.
pub trait Mergeable: Sized {
    fn merge(&self, other: &Self) -> Result<Self>;
}

/// Supported summary kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelId {
    /// count, sum, min and max in one pass
    Moments,
    /// count, mean and pooled standard deviation
    Variance,
    TrigMoments,
    LeastSquares,
    BinCounts,
}

/// A per-shard statistic together with the merge that combines shard results.
pub trait MergeKernel<T>: Sync {
    type Summary: Mergeable + Clone + Send;

    fn id(&self) -> KernelId;

    /// Number of scalars carried by one summary.
    fn arity(&self) -> usize;

    fn summarize(&self, shard: &[T]) -> Result<Self::Summary>;
}

/// Summarizes every shard with `kernel`, then folds the summaries in shard order.
pub fn map_reduce<T, K, E>(ds: &ShardedDataset<T>, kernel: &K, exec: &E) -> Result<K::Summary>
where
    T: Sync,
    K: MergeKernel<T>,
    E: Executor + ?Sized,
{
    let parts = map_shards(ds, kernel, exec)?;
    fold(&parts)
}

/// The map step alone: one summary per shard, in shard order.
pub fn map_shards<T, K, E>(
    ds: &ShardedDataset<T>,
    kernel: &K,
    exec: &E,
) -> Result<Vec<K::Summary>>
where
    T: Sync,
    K: MergeKernel<T>,
    E: Executor + ?Sized,
{
    exec.map(ds.shards(), |_, shard| kernel.summarize(shard))
        .into_iter()
        .enumerate()
        .map(|(shard, r)| {
            r.map_err(|e| Error::InShard {
                shard,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Left fold of summaries in the given order.
pub fn fold<S: Mergeable + Clone>(parts: &[S]) -> Result<S> {
    let (first, rest) = parts.split_first().ok_or(Error::EmptyDataset)?;
    rest.iter().try_fold(first.clone(), |acc, s| acc.merge(s))
}

/// Pairwise (balanced binary tree) reduction of summaries.
pub fn tree_fold<S: Mergeable + Clone>(parts: &[S]) -> Result<S> {
    match parts.len() {
        0 => Err(Error::EmptyDataset),
        1 => Ok(parts[0].clone()),
        n => {
            let (left, right) = parts.split_at(n / 2);
            tree_fold(left)?.merge(&tree_fold(right)?)
        }
    }
}
