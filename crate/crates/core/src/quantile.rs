//! Approximate sample quantiles from trigonometric moments.
//!
//! The `p`-th sample quantile minimizes `(1/n) Σ ρ_p(x_i - θ)`. Replacing the
//! check loss by its truncated Fourier expansion gives an objective that
//! depends on the data only through a [`TrigMomentSummary`]:
//!
//! ```text
//! Ḡ_{J,p}(θ) = π/4 - (p - 1/2) θ + (p - 1/2) X̄
//!              - (2/π) Σ_j [C̄_{2j-1} cos((2j-1)θ) + C̄_{2j} sin((2j-1)θ)] / (2j-1)²
//! Ḡ'_{J,p}(θ) = F̂_J(θ) - p,
//! F̂_J(θ) = 1/2 - (2/π) Σ_j [C̄_{2j} cos((2j-1)θ) - C̄_{2j-1} sin((2j-1)θ)] / (2j-1)
//! ```
//!
//! [`solve_quantiles`] brackets the global minimum on a dense grid over `[0, 1]`
//! and refines it by bisection on `F̂_J - p`. Any number of probabilities is
//! answered from the same summary without touching the data again.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};

use crate::error::{check_probability, Error, Result};
use crate::fourier::{odd, FourierOrder, OddHarmonics};
use crate::shard::{Executor, Sequential};
use crate::sum::CompensatedSum;
use crate::summary::{BinCountSummary, TrigMomentSummary};

pub const DEFAULT_GRID_SIZE: usize = 4096;
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;
pub const MIN_GRID_SIZE: usize = 8;

/// Affine map of `[lo, hi]` onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleMap {
    lo: f64,
    hi: f64,
}

impl RescaleMap {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config(alloc::format!(
                "rescaling needs finite bounds with lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The identity on `[0, 1]`.
    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        (x - self.lo) / (self.hi - self.lo)
    }

    #[inline]
    pub fn backward(&self, t: f64) -> f64 {
        self.lo + (self.hi - self.lo) * t
    }
}

/// Probabilities to solve for and the numerical settings of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRequest {
    pub p_list: Vec<f64>,
    pub order: FourierOrder,
    pub grid_size: usize,
    pub refine_tol: f64,
}

impl QuantileRequest {
    pub fn new(p_list: Vec<f64>, order: FourierOrder) -> Result<Self> {
        let req = Self {
            p_list,
            order,
            grid_size: DEFAULT_GRID_SIZE,
            refine_tol: DEFAULT_REFINE_TOL,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_grid_size(mut self, grid_size: usize) -> Self {
        self.grid_size = grid_size;
        self
    }

    pub fn with_refine_tol(mut self, refine_tol: f64) -> Self {
        self.refine_tol = refine_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_list.is_empty() {
            return Err(Error::config("at least one probability is required"));
        }
        for &p in &self.p_list {
            check_probability(p)?;
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(Error::config(alloc::format!(
                "grid size must be at least {MIN_GRID_SIZE}, got {}",
                self.grid_size
            )));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::config("refinement tolerance must be positive"));
        }
        Ok(())
    }
}

/// Minimizer of the approximate objective for one probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSolution {
    pub p: f64,
    /// minimizer on the rescaled axis, in `[0, 1]`
    pub theta_hat: f64,
    /// objective at `theta_hat`
    pub value: f64,
    /// `|F̂_J(θ̂) - p|`
    pub derivative_residual: f64,
    /// `theta_hat` mapped back to the data scale
    pub unscaled: f64,
    /// the minimizer sits on an end of `[0, 1]`
    pub boundary_flag: bool,
}

/// `Σ_j [C̄_{2j-1} cos(aθ) + C̄_{2j} sin(aθ)] / a²`
fn cosine_part(theta: f64, tm: &TrigMomentSummary) -> f64 {
    let mut acc = CompensatedSum::ZERO;
    for (j, ((c, s), (ct, st))) in (1..).zip(tm.harmonic_means().zip(OddHarmonics::new(theta, tm.order()))) {
        let a = odd(j);
        acc.add((c * ct + s * st) / (a * a));
    }
    acc.value()
}

#[inline]
fn objective_from_parts(theta: f64, p: f64, mean: f64, cosine: f64) -> f64 {
    (FRAC_PI_4 - (p - 0.5) * theta) + (p - 0.5) * mean - (2.0 / PI) * cosine
}

/// `Ḡ_{J,p}(θ) = (1/n) Σ_i ρ_{J,p}(x_i - θ)` evaluated from the summary.
pub fn objective(theta: f64, p: f64, tm: &TrigMomentSummary) -> f64 {
    objective_from_parts(theta, p, tm.mean(), cosine_part(theta, tm))
}

/// Fourier-smoothed empirical distribution function `F̂_J(θ) = (1/n) Σ 1_J(x_i, θ)`.
pub fn smoothed_cdf(theta: f64, tm: &TrigMomentSummary) -> f64 {
    let mut acc = CompensatedSum::ZERO;
    for (j, ((c, s), (ct, st))) in (1..).zip(tm.harmonic_means().zip(OddHarmonics::new(theta, tm.order()))) {
        acc.add((s * ct - c * st) / odd(j));
    }
    0.5 - (2.0 / PI) * acc.value()
}

/// `∂Ḡ_{J,p}/∂θ = F̂_J(θ) - p`.
pub fn objective_derivative(theta: f64, p: f64, tm: &TrigMomentSummary) -> f64 {
    smoothed_cdf(theta, tm) - p
}

/// Solves every probability in `req` from `tm`, which must have been built on
/// data mapped through `scale`.
pub fn solve_quantiles(
    req: &QuantileRequest,
    tm: &TrigMomentSummary,
    scale: &RescaleMap,
) -> Result<Vec<QuantileSolution>> {
    solve_quantiles_with(req, tm, scale, &Sequential)
}

/// As [`solve_quantiles`], solving the probabilities through `exec`.
pub fn solve_quantiles_with<E: Executor + ?Sized>(
    req: &QuantileRequest,
    tm: &TrigMomentSummary,
    scale: &RescaleMap,
    exec: &E,
) -> Result<Vec<QuantileSolution>> {
    req.validate()?;
    if req.order != tm.order() {
        return Err(Error::Incompatible("request order differs from the summary order"));
    }
    let last = (req.grid_size - 1) as f64;
    let grid: Vec<f64> = (0..req.grid_size).map(|i| i as f64 / last).collect();
    // the data-dependent part of the objective does not involve p
    let cosine = exec.map(&grid, |_, &theta| cosine_part(theta, tm));
    let mean = tm.mean();
    Ok(exec.map(&req.p_list, |_, &p| {
        solve_one(p, req.refine_tol, &grid, &cosine, mean, tm, scale)
    }))
}

fn solve_one(
    p: f64,
    tol: f64,
    grid: &[f64],
    cosine: &[f64],
    mean: f64,
    tm: &TrigMomentSummary,
    scale: &RescaleMap,
) -> QuantileSolution {
    let mut best = 0;
    let mut best_value = f64::INFINITY;
    for (i, (&theta, &c)) in grid.iter().zip(cosine).enumerate() {
        let v = objective_from_parts(theta, p, mean, c);
        // strict comparison keeps the smallest θ among ties
        if v < best_value {
            best = i;
            best_value = v;
        }
    }

    let g = |theta: f64| objective_derivative(theta, p, tm);
    let last = grid.len() - 1;
    let mut theta_hat = grid[best];
    let candidate = if (best == 0 && g(0.0) >= 0.0) || (best == last && g(1.0) <= 0.0) {
        None
    } else {
        let lo = grid[best.saturating_sub(1)];
        let mid = grid[best];
        let hi = grid[(best + 1).min(last)];
        let (glo, gmid, ghi) = (g(lo), g(mid), g(hi));
        if glo < 0.0 && gmid >= 0.0 {
            Some(bisect(&g, lo, mid, tol))
        } else if gmid < 0.0 && ghi >= 0.0 {
            Some(bisect(&g, mid, hi, tol))
        } else {
            None
        }
    };
    let mut value = best_value;
    if let Some(t) = candidate {
        let v = objective(t, p, tm);
        if v <= best_value {
            theta_hat = t;
            value = v;
        }
    }
    QuantileSolution {
        p,
        theta_hat,
        value,
        derivative_residual: g(theta_hat).abs(),
        unscaled: scale.backward(theta_hat),
        boundary_flag: theta_hat == 0.0 || theta_hat == 1.0,
    }
}

/// Root of an increasing crossing: `f(lo) < 0 ≤ f(hi)`.
pub(crate) fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v < 0.0 {
            lo = mid;
        } else if v > 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sort-based sample quantile: the smallest order statistic `x_(k)` with `k/n ≥ p`.
pub fn exact_quantile(values: &[f64], p: f64) -> Result<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted_quantile(&sorted, p)
}

/// As [`exact_quantile`] on data that is already sorted ascending.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> Result<f64> {
    check_probability(p)?;
    let n = sorted.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(sorted[order_statistic_rank(n, p) - 1])
}

/// Smallest `k ∈ 1..=n` with `k/n ≥ p`, compared in floating point so that
/// `p = k/n` typed as a literal selects `k` exactly.
pub(crate) fn order_statistic_rank(n: usize, p: f64) -> usize {
    let nf = n as f64;
    // binary search on the monotone predicate k/n < p
    let (mut lo, mut hi) = (1usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if (mid as f64) / nf < p {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Quantile from cumulative bin counts, interpolating linearly inside the first
/// bin whose cumulative fraction reaches `p`.
///
/// Returns the bin index alongside the estimate.
pub fn binning_quantile_indexed(bc: &BinCountSummary, p: f64) -> Result<(f64, usize)> {
    check_probability(p)?;
    let total = bc.total();
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let total = total as f64;
    let edges = bc.edges();
    let mut cum = 0u64;
    for (r, &count) in bc.counts().iter().enumerate() {
        let next = cum + count;
        if count > 0 && next as f64 / total >= p {
            let shortfall = (p * total - cum as f64).clamp(0.0, count as f64);
            let (lo, hi) = (edges[r], edges[r + 1]);
            let value = if next as f64 / total == p {
                hi
            } else {
                lo + (hi - lo) * (shortfall / count as f64)
            };
            return Ok((value, r));
        }
        cum = next;
    }
    let last = bc.counts().len() - 1;
    Ok((edges[last + 1], last))
}

pub fn binning_quantile(bc: &BinCountSummary, p: f64) -> Result<f64> {
    binning_quantile_indexed(bc, p).map(|(v, _)| v)
}
