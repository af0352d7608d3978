//! Shard summaries and their merge formulas.
//!
//! Every summary here is a strongly embarrassingly parallel statistic: the
//! value for the whole dataset is a fixed function of the per-shard values,
//! whatever the partition.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fourier::{FourierOrder, OddHarmonics};
use crate::quantile::RescaleMap;
use crate::shard::{KernelId, MergeKernel, Mergeable};
use crate::sum::CompensatedSum;

/// Types whose summaries only look at one real coordinate.
pub trait Abscissa {
    fn abscissa(&self) -> f64;
}

impl Abscissa for f64 {
    #[inline]
    fn abscissa(&self) -> f64 {
        *self
    }
}

impl Abscissa for (f64, f64) {
    #[inline]
    fn abscissa(&self) -> f64 {
        self.0
    }
}

/// Count, sum, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    count: u64,
    sum: CompensatedSum,
    min: f64,
    max: f64,
}

impl MomentSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::from_iter(values.iter().copied())
    }

    fn from_iter(mut values: impl Iterator<Item = f64>) -> Result<Self> {
        let first = values.next().ok_or(Error::EmptyDataset)?;
        let mut s = Self {
            count: 1,
            sum: CompensatedSum::ZERO,
            min: first,
            max: first,
        };
        s.sum.add(first);
        for v in values {
            s.count += 1;
            s.sum.add(v);
            s.min = s.min.min(v);
            s.max = s.max.max(v);
        }
        Ok(s)
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.count as f64
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

impl Mergeable for MomentSummary {
    fn merge(&self, other: &Self) -> Result<Self> {
        let mut sum = self.sum;
        sum.merge(&other.sum);
        Ok(Self {
            count: self.count + other.count,
            sum,
            min: self.min.min(other.min),
            max: self.max.max(other.max),
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MomentKernel;

impl<T: Abscissa + Sync> MergeKernel<T> for MomentKernel {
    type Summary = MomentSummary;

    fn id(&self) -> KernelId {
        KernelId::Moments
    }

    fn arity(&self) -> usize {
        4
    }

    fn summarize(&self, shard: &[T]) -> Result<MomentSummary> {
        MomentSummary::from_iter(shard.iter().map(Abscissa::abscissa))
    }
}

/// Count, mean and sample standard deviation (divisor `count - 1`).
///
/// The mean and standard deviation of a union follow from the parts alone:
///
/// ```text
/// S(X)² = Σ_r [ (n_r - 1) S(X_r)² + n_r (X̄_r - X̄)² ] / (n - 1)
/// ```
///
/// Merging two parts at a time in the form `m2 = m2_a + m2_b + δ² n_a n_b / n`
/// (with `m2 = (n - 1) S²` and `δ = X̄_b - X̄_a`) is the same identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSummary {
    count: u64,
    mean: f64,
    m2: f64,
}

impl VarianceSummary {
    /// Two-pass construction with the usual rounding correction.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = values.len() as f64;
        let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
        let mut sq = CompensatedSum::ZERO;
        let mut lin = CompensatedSum::ZERO;
        for &v in values {
            let d = v - mean;
            sq.add(d * d);
            lin.add(d);
        }
        let lin = lin.value();
        let m2 = (sq.value() - lin * lin / n).max(0.0);
        Ok(Self {
            count: values.len() as u64,
            mean: mean + lin / n,
            m2,
        })
    }

    /// Rebuilds a summary from its published parts. A singleton carries `s = 0`.
    pub fn from_parts(count: u64, mean: f64, s: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyDataset);
        }
        if !(s >= 0.0) {
            return Err(Error::OutOfDomain {
                value: s,
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
        Ok(Self {
            count,
            mean,
            m2: s * s * (count - 1) as f64,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation; 0 for a single observation.
    pub fn s(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            libm::sqrt(self.m2 / (self.count - 1) as f64)
        }
    }
}

impl Mergeable for VarianceSummary {
    fn merge(&self, other: &Self) -> Result<Self> {
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        Ok(Self {
            count: self.count + other.count,
            mean: self.mean + delta * (nb / n),
            m2: self.m2 + other.m2 + delta * delta * (na * nb / n),
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VarianceKernel;

impl MergeKernel<f64> for VarianceKernel {
    type Summary = VarianceSummary;

    fn id(&self) -> KernelId {
        KernelId::Variance
    }

    fn arity(&self) -> usize {
        3
    }

    fn summarize(&self, shard: &[f64]) -> Result<VarianceSummary> {
        VarianceSummary::from_values(shard)
    }
}

/// Trigonometric moments of data in `[0, 1]`: the count, the mean and, for
/// `j = 1..=J`, the averages of `cos((2j-1)x)` and `sin((2j-1)x)`.
///
/// These `2J + 2` numbers answer every approximate quantile and neighborhood
/// query. Sums are kept compensated; the averages are formed on access.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMomentSummary {
    order: FourierOrder,
    count: u64,
    sum: CompensatedSum,
    /// interleaved `[Σcos x, Σsin x, Σcos 3x, Σsin 3x, ...]`
    sums: Vec<CompensatedSum>,
}

impl TrigMomentSummary {
    pub fn empty(order: FourierOrder) -> Self {
        Self {
            order,
            count: 0,
            sum: CompensatedSum::ZERO,
            sums: vec![CompensatedSum::ZERO; 2 * order.get()],
        }
    }

    pub fn from_values(values: &[f64], order: FourierOrder) -> Result<Self> {
        let mut s = Self::empty(order);
        for &v in values {
            s.push(v)?;
        }
        if s.count == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(s)
    }

    /// Rebuilds a summary from published averages `c_bar` (length `2J`, interleaved cos/sin).
    pub fn from_parts(order: FourierOrder, count: u64, mean: f64, c_bar: &[f64]) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyDataset);
        }
        if c_bar.len() != 2 * order.get() {
            return Err(Error::Shape {
                expected: 2 * order.get(),
                found: c_bar.len(),
            });
        }
        let n = count as f64;
        let mut sum = CompensatedSum::ZERO;
        sum.add(mean * n);
        let sums = c_bar
            .iter()
            .map(|&c| {
                let mut s = CompensatedSum::ZERO;
                s.add(c * n);
                s
            })
            .collect();
        Ok(Self {
            order,
            count,
            sum,
            sums,
        })
    }

    /// Adds one datum, which must lie in `[0, 1]`.
    #[inline]
    pub fn push(&mut self, x: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain {
                value: x,
                lo: 0.0,
                hi: 1.0,
            });
        }
        self.count += 1;
        self.sum.add(x);
        for (pair, (c, s)) in self.sums.chunks_exact_mut(2).zip(OddHarmonics::new(x, self.order)) {
            pair[0].add(c);
            pair[1].add(s);
        }
        Ok(())
    }

    pub fn order(&self) -> FourierOrder {
        self.order
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.count as f64
    }

    /// Averages `(C̄_{2j-1}, C̄_{2j})` for `j = 1..=J`.
    pub fn harmonic_means(&self) -> impl ExactSizeIterator<Item = (f64, f64)> + '_ {
        let n = self.count as f64;
        self.sums
            .chunks_exact(2)
            .map(move |pair| (pair[0].value() / n, pair[1].value() / n))
    }

    /// The `2J` averages, interleaved cos/sin.
    pub fn c_bar(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.sums.iter().map(|s| s.value() / n).collect()
    }
}

impl Mergeable for TrigMomentSummary {
    fn merge(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::Incompatible("trigonometric moments of different order"));
        }
        let mut out = self.clone();
        out.count += other.count;
        out.sum.merge(&other.sum);
        for (a, b) in out.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
        Ok(out)
    }
}

/// Trigonometric moments, optionally after mapping each datum onto `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct TrigMomentKernel {
    order: FourierOrder,
    rescale: Option<RescaleMap>,
}

impl TrigMomentKernel {
    pub fn new(order: FourierOrder) -> Self {
        Self {
            order,
            rescale: None,
        }
    }

    pub fn with_rescale(mut self, map: RescaleMap) -> Self {
        self.rescale = Some(map);
        self
    }
}

impl<T: Abscissa + Sync> MergeKernel<T> for TrigMomentKernel {
    type Summary = TrigMomentSummary;

    fn id(&self) -> KernelId {
        KernelId::TrigMoments
    }

    fn arity(&self) -> usize {
        2 * self.order.get() + 2
    }

    fn summarize(&self, shard: &[T]) -> Result<TrigMomentSummary> {
        let mut s = TrigMomentSummary::empty(self.order);
        for v in shard {
            let x = v.abscissa();
            match &self.rescale {
                Some(map) => s.push(map.forward(x))?,
                None => s.push(x)?,
            }
        }
        Ok(s)
    }
}

/// Least-squares accumulators `Z'Z`, `Z'Y` (optionally weighted) over `d` predictors.
#[derive(Debug, Clone, PartialEq)]
pub struct LsqSummary {
    dim: usize,
    count: u64,
    ztz: Vec<CompensatedSum>,
    zty: Vec<CompensatedSum>,
}

impl LsqSummary {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: 0,
            ztz: vec![CompensatedSum::ZERO; dim * dim],
            zty: vec![CompensatedSum::ZERO; dim],
        }
    }

    pub fn add_row(&mut self, z: &[f64], y: f64) -> Result<()> {
        self.add_weighted_row(z, y, 1.0)
    }

    pub fn add_weighted_row(&mut self, z: &[f64], y: f64, w: f64) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                found: z.len(),
            });
        }
        self.count += 1;
        for (i, &zi) in z.iter().enumerate() {
            let wz = w * zi;
            self.zty[i].add(wz * y);
            for (j, &zj) in z.iter().enumerate() {
                self.ztz[i * self.dim + j].add(wz * zj);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows accumulated.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// `Z'WZ`, row-major `d × d`.
    pub fn ztz(&self) -> Vec<f64> {
        self.ztz.iter().map(CompensatedSum::value).collect()
    }

    /// `Z'WY`
    pub fn zty(&self) -> Vec<f64> {
        self.zty.iter().map(CompensatedSum::value).collect()
    }
}

impl Mergeable for LsqSummary {
    fn merge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = self.clone();
        out.count += other.count;
        for (a, b) in out.ztz.iter_mut().zip(&other.ztz) {
            a.merge(b);
        }
        for (a, b) in out.zty.iter_mut().zip(&other.zty) {
            a.merge(b);
        }
        Ok(out)
    }
}

/// One regression row: predictors `z` and response `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsqRow {
    pub z: Vec<f64>,
    pub y: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LsqKernel {
    pub dim: usize,
}

impl MergeKernel<LsqRow> for LsqKernel {
    type Summary = LsqSummary;

    fn id(&self) -> KernelId {
        KernelId::LeastSquares
    }

    fn arity(&self) -> usize {
        self.dim * self.dim + self.dim + 1
    }

    fn summarize(&self, shard: &[LsqRow]) -> Result<LsqSummary> {
        let mut s = LsqSummary::new(self.dim);
        for row in shard {
            s.add_row(&row.z, row.y)?;
        }
        Ok(s)
    }
}

/// Histogram over bins `[b₀, b₁], (b₁, b₂], …, (b_{B-1}, b_B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCountSummary {
    edges: Vec<f64>,
    counts: Vec<u64>,
}

impl BinCountSummary {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::config("at least two bin edges are required"));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("bin edges must be finite and strictly increasing"));
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; bins],
        })
    }

    /// `bins` equal-width bins spanning `[lo, hi]`.
    pub fn equispaced(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::config("bin count must be positive"));
        }
        let width = hi - lo;
        let mut edges: Vec<f64> = (0..=bins).map(|r| lo + width * (r as f64 / bins as f64)).collect();
        edges[bins] = hi;
        Self::new(edges)
    }

    /// Bin holding `x`, found by binary search over the upper edges.
    pub fn bin_index(&self, x: f64) -> Result<usize> {
        let lo = self.edges[0];
        let hi = self.edges[self.edges.len() - 1];
        if !(lo..=hi).contains(&x) {
            return Err(Error::OutOfDomain { value: x, lo, hi });
        }
        Ok(self.edges[1..].partition_point(|&e| e < x))
    }

    pub fn add(&mut self, x: f64) -> Result<()> {
        let i = self.bin_index(x)?;
        self.counts[i] += 1;
        Ok(())
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl Mergeable for BinCountSummary {
    fn merge(&self, other: &Self) -> Result<Self> {
        if self.edges != other.edges {
            return Err(Error::Incompatible("histograms with different edges"));
        }
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect();
        Ok(Self {
            edges: self.edges.clone(),
            counts,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BinCountKernel {
    template: BinCountSummary,
}

impl BinCountKernel {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        Ok(Self {
            template: BinCountSummary::new(edges)?,
        })
    }

    pub fn equispaced(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        Ok(Self {
            template: BinCountSummary::equispaced(lo, hi, bins)?,
        })
    }
}

impl<T: Abscissa + Sync> MergeKernel<T> for BinCountKernel {
    type Summary = BinCountSummary;

    fn id(&self) -> KernelId {
        KernelId::BinCounts
    }

    fn arity(&self) -> usize {
        self.template.counts.len()
    }

    fn summarize(&self, shard: &[T]) -> Result<BinCountSummary> {
        let mut s = self.template.clone();
        for v in shard {
            s.add(v.abscissa())?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shard::{map_reduce, Sequential, ShardedDataset};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn order(j: usize) -> FourierOrder {
        FourierOrder::new(j).unwrap()
    }

    fn direct_std(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn trig_moments_of_single_point() {
        let s = TrigMomentSummary::from_values(&[0.3], order(5)).unwrap();
        assert_eq!(s.count(), 1);
        for (j, (c, sn)) in (1..).zip(s.harmonic_means()) {
            let a = (2 * j - 1) as f64 * 0.3;
            assert_abs_diff_eq!(c, libm::cos(a), epsilon = 1e-14);
            assert_abs_diff_eq!(sn, libm::sin(a), epsilon = 1e-14);
        }
    }

    #[test]
    fn trig_moments_two_points() {
        let s = TrigMomentSummary::from_values(&[0.25, 0.75], order(1)).unwrap();
        let c = s.c_bar();
        assert_abs_diff_eq!(c[0], 0.850_300_645_292_232_8, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 0.464_521_359_638_928_5, epsilon = 1e-15);
    }

    #[test]
    fn trig_moments_reversal_invariant() {
        let values: Vec<f64> = (0..50).map(|i| (i as f64 * 0.618).fract()).collect();
        let mut rev = values.clone();
        rev.reverse();
        let a = TrigMomentSummary::from_values(&values, order(16)).unwrap();
        let b = TrigMomentSummary::from_values(&rev, order(16)).unwrap();
        assert_eq!(a.count(), b.count());
        for (x, y) in a.c_bar().iter().zip(b.c_bar()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn trig_moments_reject_out_of_domain() {
        let err = TrigMomentSummary::from_values(&[0.5, 1.25], order(2)).unwrap_err();
        assert_eq!(err, Error::OutOfDomain { value: 1.25, lo: 0.0, hi: 1.0 });
        assert!(TrigMomentSummary::from_values(&[-0.1], order(2)).is_err());
    }

    #[test]
    fn trig_moments_via_map_reduce() {
        let values: Vec<f64> = (1..=1000).map(|i| i as f64 / 1001.0).collect();
        let ds = ShardedDataset::partition(values.clone(), 7).unwrap();
        let s = map_reduce(&ds, &TrigMomentKernel::new(order(64)), &Sequential).unwrap();
        for (j, (c, sn)) in (1..).zip(s.harmonic_means()) {
            let a = (2 * j - 1) as f64;
            let dc = values.iter().map(|x| libm::cos(a * x)).sum::<f64>() / 1000.0;
            let ds_ = values.iter().map(|x| libm::sin(a * x)).sum::<f64>() / 1000.0;
            assert_abs_diff_eq!(c, dc, epsilon = 1e-12);
            assert_abs_diff_eq!(sn, ds_, epsilon = 1e-12);
        }
    }

    #[test]
    fn merge_orders_must_match() {
        let a = TrigMomentSummary::from_values(&[0.1], order(2)).unwrap();
        let b = TrigMomentSummary::from_values(&[0.1], order(3)).unwrap();
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn pooled_std_of_two_pairs() {
        let a = VarianceSummary::from_values(&[1.0, 2.0]).unwrap();
        let b = VarianceSummary::from_values(&[3.0, 4.0]).unwrap();
        let m = a.merge(&b).unwrap();
        assert_abs_diff_eq!(m.s(), 1.290_994_448_735_805_6, epsilon = 1e-15);
        assert_eq!(m.mean(), 2.5);
    }

    #[test]
    fn pooled_std_of_constants() {
        let a = VarianceSummary::from_values(&[7.5; 4]).unwrap();
        let b = VarianceSummary::from_values(&[7.5; 3]).unwrap();
        assert_eq!(a.merge(&b).unwrap().s(), 0.0);
    }

    #[test]
    fn singleton_variance_merges_with_zero_weight() {
        let a = VarianceSummary::from_values(&[1.0, 5.0, 9.0]).unwrap();
        let single = VarianceSummary::from_parts(1, 5.0, 0.0).unwrap();
        let m = a.merge(&single).unwrap();
        assert_abs_diff_eq!(m.s(), direct_std(&[1.0, 5.0, 9.0, 5.0]), epsilon = 1e-14);
        assert_eq!(VarianceSummary::from_values(&[3.0]).unwrap().s(), 0.0);
    }

    #[test]
    fn pooled_std_matches_r_way_formula() {
        let parts: [&[f64]; 3] = [&[0.5, 1.5, 9.0], &[120.0], &[3.0, 4.0, 800.0, 2.5]];
        let all: Vec<f64> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        let n = all.len() as f64;
        let mean = all.iter().sum::<f64>() / n;
        let inner: f64 = parts
            .iter()
            .map(|p| {
                let nr = p.len() as f64;
                let mr = p.iter().sum::<f64>() / nr;
                let sr = if p.len() > 1 { direct_std(p) } else { 0.0 };
                (nr - 1.0) / (n - 1.0) * sr * sr + nr / (n - 1.0) * (mr - mean) * (mr - mean)
            })
            .sum();
        let merged = parts
            .iter()
            .map(|p| VarianceSummary::from_values(p).unwrap())
            .reduce(|a, b| a.merge(&b).unwrap())
            .unwrap();
        assert!((merged.s() - libm::sqrt(inner)).abs() <= 1e-12 * merged.s());
    }

    #[test]
    fn lsq_additivity() {
        let mut a = LsqSummary::new(2);
        a.add_row(&[1.0, 2.0], 3.0).unwrap();
        let mut b = LsqSummary::new(2);
        b.add_row(&[-1.0, 0.5], 1.0).unwrap();
        let m = a.merge(&b).unwrap();
        assert_eq!(m.ztz(), vec![2.0, 1.5, 1.5, 4.25]);
        assert_eq!(m.zty(), vec![2.0, 6.5]);
        assert_eq!(m.count(), 2);

        let mut zeros = LsqSummary::new(2);
        zeros.add_row(&[0.0, 0.0], 0.0).unwrap();
        assert_eq!(m.merge(&zeros).unwrap().ztz(), m.ztz());
    }

    #[test]
    fn lsq_shape_errors() {
        let mut a = LsqSummary::new(3);
        assert_eq!(a.add_row(&[1.0], 0.0), Err(Error::Shape { expected: 3, found: 1 }));
        assert!(a.merge(&LsqSummary::new(2)).is_err());
    }

    #[test]
    fn lsq_split_matches_direct_products() {
        let rows: Vec<LsqRow> = (0..5)
            .map(|i| {
                let t = i as f64;
                LsqRow { z: vec![1.0, libm::sin(t), t * t * 0.3], y: libm::cos(t * 1.7) }
            })
            .collect();
        let ds = ShardedDataset::from_shards(vec![rows[..2].to_vec(), rows[2..].to_vec()], Default::default()).unwrap();
        let s = map_reduce(&ds, &LsqKernel { dim: 3 }, &Sequential).unwrap();
        let ztz = s.ztz();
        for i in 0..3 {
            let zy: f64 = rows.iter().map(|r| r.z[i] * r.y).sum();
            assert!((s.zty()[i] - zy).abs() <= 1e-12 * zy.abs().max(1.0));
            for j in 0..3 {
                let zz: f64 = rows.iter().map(|r| r.z[i] * r.z[j]).sum();
                assert!((ztz[i * 3 + j] - zz).abs() <= 1e-12 * zz.abs().max(1.0));
            }
        }
    }

    #[test]
    fn bins_use_right_closed_intervals() {
        let mut b = BinCountSummary::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        for x in [0.0, 1.0, 1.5, 2.0, 3.0] {
            b.add(x).unwrap();
        }
        assert_eq!(b.counts(), &[2, 2, 1]);
        assert!(matches!(b.add(3.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(b.add(-0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn bins_all_in_one() {
        let ds = ShardedDataset::partition(vec![0.51, 0.52, 0.53, 0.55], 2).unwrap();
        let s = map_reduce(&ds, &BinCountKernel::equispaced(0.0, 1.0, 4).unwrap(), &Sequential).unwrap();
        assert_eq!(s.counts(), &[0, 0, 4, 0]);
    }

    #[test]
    fn bins_on_uniform_grid() {
        // grid k/1000, k = 1..=999: k = 1..=100 land in the first bin, 901..=999 in the last,
        // every other bin holds exactly 100
        let values: Vec<f64> = (1..1000).map(|k| k as f64 / 1000.0).collect();
        let ds = ShardedDataset::partition(values, 4).unwrap();
        let s = map_reduce(&ds, &BinCountKernel::equispaced(0.0, 1.0, 10).unwrap(), &Sequential).unwrap();
        assert_eq!(s.total(), 999);
        let max = *s.counts().iter().max().unwrap();
        let min = *s.counts().iter().min().unwrap();
        assert!(max - min <= 1, "{:?}", s.counts());
    }

    #[test]
    fn bin_edges_validated() {
        assert!(BinCountSummary::new(vec![0.0]).is_err());
        assert!(BinCountSummary::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(BinCountSummary::equispaced(0.0, 1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn c_bar_is_bounded(values in proptest::collection::vec(0.0f64..=1.0, 1..40), j in 1usize..64) {
            let s = TrigMomentSummary::from_values(&values, order(j)).unwrap();
            prop_assert!(s.c_bar().iter().all(|c| c.abs() <= 1.0));
        }

        #[test]
        fn trig_merge_is_weighted_average(
            a in proptest::collection::vec(0.0f64..=1.0, 1..30),
            b in proptest::collection::vec(0.0f64..=1.0, 1..30),
        ) {
            let sa = TrigMomentSummary::from_values(&a, order(8)).unwrap();
            let sb = TrigMomentSummary::from_values(&b, order(8)).unwrap();
            let m = sa.merge(&sb).unwrap();
            let (na, nb) = (a.len() as f64, b.len() as f64);
            for ((x, y), z) in sa.c_bar().iter().zip(sb.c_bar()).zip(m.c_bar()) {
                prop_assert!(((na * x + nb * y) / (na + nb) - z).abs() <= 1e-12);
            }
            prop_assert!(((na * sa.mean() + nb * sb.mean()) / (na + nb) - m.mean()).abs() <= 1e-12);
        }

        #[test]
        fn lsq_gram_is_symmetric_psd(rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 1..20), v in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let mut s = LsqSummary::new(3);
            for r in &rows {
                s.add_row(r, 1.0).unwrap();
            }
            let g = s.ztz();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(g[i * 3 + j], g[j * 3 + i]);
                }
            }
            let quad: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| v[i] * g[i * 3 + j] * v[j]).sum();
            prop_assert!(quad >= -1e-10);
        }

        #[test]
        fn bin_counts_cover_everything(values in proptest::collection::vec(0.0f64..=1.0, 1..100), bins in 1usize..20) {
            let mut s = BinCountSummary::equispaced(0.0, 1.0, bins).unwrap();
            for &v in &values {
                s.add(v).unwrap();
            }
            prop_assert_eq!(s.total() as usize, values.len());
        }

        #[test]
        fn pooled_std_over_partitions(
            values in proptest::collection::vec(0.01f64..100.0, 2..80),
            cuts in proptest::collection::vec(1usize..80, 0..6),
        ) {
            let mut cuts: Vec<usize> = cuts.into_iter().filter(|&c| c < values.len()).collect();
            cuts.sort_unstable();
            cuts.dedup();
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(values.len());
            let merged = bounds
                .windows(2)
                .map(|w| VarianceSummary::from_values(&values[w[0]..w[1]]).unwrap())
                .reduce(|a, b| a.merge(&b).unwrap())
                .unwrap();
            let direct = direct_std(&values);
            prop_assert!(merged.s() >= 0.0);
            prop_assert!((merged.s() - direct).abs() <= 1e-10 * direct.max(1e-300));
        }
    }
}
