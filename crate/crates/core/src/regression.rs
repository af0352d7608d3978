//! Local polynomial regression with Fourier-approximated neighborhoods.
//!
//! For an evaluation point `x` the neighborhood half-width `h` is chosen so
//! that a fraction `α` of the data falls inside `[x - h, x + h]`. Exactly, that
//! is the distance from `x` to its `⌈α n⌉`-th nearest neighbor, which needs the
//! raw data. Approximately, it is a root of
//!
//! ```text
//! F̂_{J,x}(h) = (4/π) Σ_j (C̄_{2j-1} cos((2j-1)x) + C̄_{2j} sin((2j-1)x)) sin((2j-1)h) / (2j-1) = α
//! ```
//!
//! which only needs the [`TrigMomentSummary`]. Given `h`, a degree-`K`
//! polynomial in `x_i - x` is fitted with tri-weights `w(|x_i - x| / h)`; the
//! weighted Gram matrix and moment vector are shard-mergeable sums.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::{odd, FourierOrder, OddHarmonics};
use crate::linalg::solve_pivoted;
use crate::quantile::{bisect, order_statistic_rank};
use crate::shard::{map_reduce, Executor, KernelId, MergeKernel, ShardedDataset};
use crate::sum::CompensatedSum;
use crate::summary::{LsqSummary, TrigMomentKernel, TrigMomentSummary};

pub const DEFAULT_ROOT_GRID: usize = 2048;
pub const DEFAULT_REFINE_TOL: f64 = 1e-8;
/// Smallest accepted pivot relative to the largest in the local solve.
pub const PIVOT_REL_TOL: f64 = 1e-12;

/// Settings of a local regression run.
#[derive(Debug, Clone, PartialEq)]
pub struct LowessConfig {
    pub alpha: f64,
    pub degree: usize,
    pub order: FourierOrder,
    pub eval_points: Vec<f64>,
    pub root_grid: usize,
    pub refine_tol: f64,
}

impl LowessConfig {
    /// Root grid defaults to `max(2048, 4J)`.
    pub fn new(alpha: f64, degree: usize, order: FourierOrder, eval_points: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            alpha,
            degree,
            order,
            eval_points,
            root_grid: DEFAULT_ROOT_GRID.max(4 * order.get()),
            refine_tol: DEFAULT_REFINE_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_root_grid(mut self, root_grid: usize) -> Self {
        self.root_grid = root_grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(alloc::format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.eval_points.is_empty() {
            return Err(Error::config("at least one evaluation point is required"));
        }
        if let Some(&x) = self.eval_points.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(Error::OutOfDomain { value: x, lo: 0.0, hi: 1.0 });
        }
        if self.root_grid < 4 * self.order.get() {
            return Err(Error::config(alloc::format!(
                "root grid {} is coarser than 4J = {}",
                self.root_grid,
                4 * self.order.get()
            )));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::config("refinement tolerance must be positive"));
        }
        Ok(())
    }
}

/// Solved neighborhood half-width at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSolution {
    pub x: f64,
    pub h_hat: f64,
    /// `|F̂_{J,x}(ĥ) - α|`
    pub residual: f64,
    /// number of sign-change brackets found on the scan grid
    pub root_count: usize,
}

/// Weighted local polynomial fit at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFit {
    pub x: f64,
    pub h: f64,
    /// coefficients of `(x_i - x)^k`, `k = 0..=K`
    pub beta: Vec<f64>,
    /// fitted value at `x`, equal to `beta[0]`
    pub mu_hat: f64,
    /// `Σ W_i (x_i - x)^{k+k'}`, row-major
    pub a_mat: Vec<f64>,
    /// `Σ W_i y_i (x_i - x)^k`
    pub a_vec: Vec<f64>,
    /// points with positive weight
    pub effective_weight_count: u64,
}

/// How the neighborhood half-width is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandwidthMethod {
    /// root of the Fourier-smoothed interval mass equation
    #[default]
    Fourier,
    /// `⌈α n⌉`-th nearest-neighbor distance from the raw data
    Exact,
}

/// One evaluation point of [`predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub x: f64,
    pub method: BandwidthMethod,
    /// present for [`BandwidthMethod::Fourier`]
    pub bandwidth: Option<BandwidthSolution>,
    pub fit: LocalFit,
}

impl Prediction {
    pub fn mu_hat(&self) -> f64 {
        self.fit.mu_hat
    }

    pub fn h(&self) -> f64 {
        self.fit.h
    }
}

/// `Σ_j (C̄_{2j-1} cos(ax) + C̄_{2j} sin(ax)) / a` for each odd harmonic `a`:
/// the coefficients of `sin(a h)` in `F̂_{J,x}(h)`.
fn sine_coefficients(x: f64, tm: &TrigMomentSummary) -> Vec<f64> {
    (1..)
        .zip(tm.harmonic_means().zip(OddHarmonics::new(x, tm.order())))
        .map(|(j, ((c, s), (cx, sx)))| (c * cx + s * sx) / odd(j))
        .collect()
}

fn sine_series(coefs: &[f64], h: f64, order: FourierOrder) -> f64 {
    let mut acc = CompensatedSum::ZERO;
    for (w, (_, s)) in coefs.iter().zip(OddHarmonics::new(h, order)) {
        acc.add(w * s);
    }
    (4.0 / PI) * acc.value()
}

/// Fourier-smoothed fraction of data inside `[x - h, x + h)`.
pub fn f_hat_jx(h: f64, x: f64, tm: &TrigMomentSummary) -> f64 {
    sine_series(&sine_coefficients(x, tm), h, tm.order())
}

/// Smallest root `h ∈ (0, 1)` of `F̂_{J,x}(h) = α`.
///
/// Scans `h = 0` and `root_grid` interior points `i / (root_grid + 1)`, counts
/// every sign change of `F̂_{J,x} - α`, and bisects the first one.
pub fn solve_bandwidth(x: f64, cfg: &LowessConfig, tm: &TrigMomentSummary) -> Result<BandwidthSolution> {
    cfg.validate()?;
    if cfg.order != tm.order() {
        return Err(Error::Incompatible("configuration order differs from the summary order"));
    }
    let coefs = sine_coefficients(x, tm);
    let f = |h: f64| sine_series(&coefs, h, tm.order()) - cfg.alpha;
    let step = 1.0 / (cfg.root_grid + 1) as f64;

    let mut first: Option<(f64, f64)> = None;
    let mut root_count = 0;
    let mut prev_h = 0.0;
    let mut prev_v = -cfg.alpha; // F̂_{J,x}(0) = 0
    for i in 1..=cfg.root_grid {
        let h = i as f64 * step;
        let v = f(h);
        if prev_v < 0.0 && v >= 0.0 || prev_v > 0.0 && v <= 0.0 {
            root_count += 1;
            if first.is_none() {
                first = Some((prev_h, h));
            }
        }
        prev_h = h;
        prev_v = v;
    }
    let (lo, hi) = first.ok_or(Error::NoBandwidth { x })?;
    // the first crossing from h = 0 is always upward
    let h_hat = bisect(&f, lo, hi, cfg.refine_tol);
    Ok(BandwidthSolution {
        x,
        h_hat,
        residual: f(h_hat).abs(),
        root_count,
    })
}

/// Distance from `x` to its `⌈α n⌉`-th nearest neighbor.
pub fn exact_bandwidth(values: &[f64], x: f64, alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::config(alloc::format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let k = order_statistic_rank(values.len(), alpha);
    let mut dist: Vec<f64> = values.iter().map(|v| (v - x).abs()).collect();
    let (_, kth, _) = dist.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// Tukey's tri-weight `(1 - u³)³` on `[0, 1)`, zero beyond.
pub fn triweight(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::OutOfDomain {
            value: u,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(triweight_unchecked(u))
}

#[inline]
fn triweight_unchecked(u: f64) -> f64 {
    if u < 1.0 {
        let t = 1.0 - u * u * u;
        t * t * t
    } else {
        0.0
    }
}

/// Per-shard accumulation of `Σ W_i (x_i - x)^{k+k'}` and `Σ W_i y_i (x_i - x)^k`.
#[derive(Debug, Clone, Copy)]
pub struct LocalMomentKernel {
    pub x: f64,
    pub h: f64,
    pub degree: usize,
}

impl MergeKernel<(f64, f64)> for LocalMomentKernel {
    type Summary = LsqSummary;

    fn id(&self) -> KernelId {
        KernelId::LeastSquares
    }

    fn arity(&self) -> usize {
        let d = self.degree + 1;
        d * d + d + 1
    }

    fn summarize(&self, shard: &[(f64, f64)]) -> Result<LsqSummary> {
        let dim = self.degree + 1;
        let mut acc = LsqSummary::new(dim);
        let mut powers = alloc::vec![0.0; dim];
        for &(xi, yi) in shard {
            let d = xi - self.x;
            let w = triweight_unchecked(d.abs() / self.h);
            if w == 0.0 {
                continue;
            }
            let mut pw = 1.0;
            for slot in powers.iter_mut() {
                *slot = pw;
                pw *= d;
            }
            acc.add_weighted_row(&powers, yi, w)?;
        }
        Ok(acc)
    }
}

/// Fits the degree-`K` tri-weighted polynomial at `x` with half-width `h`.
pub fn local_fit<E: Executor + ?Sized>(
    x: f64,
    h: f64,
    data: &ShardedDataset<(f64, f64)>,
    degree: usize,
    exec: &E,
) -> Result<LocalFit> {
    if !(h > 0.0) {
        return Err(Error::DegenerateNeighborhood { x, h });
    }
    let acc = map_reduce(data, &LocalMomentKernel { x, h, degree }, exec)?;
    fit_from_moments(x, h, &acc)
}

/// Solves the local normal equations from merged [`LocalMomentKernel`] sums.
pub fn fit_from_moments(x: f64, h: f64, acc: &LsqSummary) -> Result<LocalFit> {
    if acc.count() < acc.dim() as u64 {
        return Err(Error::DegenerateNeighborhood { x, h });
    }
    let a_mat = acc.ztz();
    let a_vec = acc.zty();
    let beta = solve_pivoted(&a_mat, &a_vec, PIVOT_REL_TOL).map_err(|_| Error::DegenerateNeighborhood { x, h })?;
    Ok(LocalFit {
        x,
        h,
        mu_hat: beta[0],
        beta,
        a_mat,
        a_vec,
        effective_weight_count: acc.count(),
    })
}

/// Runs bandwidth selection and the local fit at every evaluation point.
///
/// The outer error covers failures shared by all points (configuration, data
/// outside `[0, 1]`); per-point failures are reported in place.
pub fn predict<E: Executor + ?Sized>(
    cfg: &LowessConfig,
    data: &ShardedDataset<(f64, f64)>,
    method: BandwidthMethod,
    exec: &E,
) -> Result<Vec<Result<Prediction>>> {
    cfg.validate()?;
    match method {
        BandwidthMethod::Fourier => {
            let tm = map_reduce(data, &TrigMomentKernel::new(cfg.order), exec)?;
            Ok(exec.map(&cfg.eval_points, |_, &x| {
                let bw = solve_bandwidth(x, cfg, &tm)?;
                let fit = local_fit(x, bw.h_hat, data, cfg.degree, exec)?;
                Ok(Prediction {
                    x,
                    method,
                    bandwidth: Some(bw),
                    fit,
                })
            }))
        }
        BandwidthMethod::Exact => {
            let xs: Vec<f64> = data.iter().map(|p| p.0).collect();
            Ok(exec.map(&cfg.eval_points, |_, &x| {
                let h = exact_bandwidth(&xs, x, cfg.alpha)?;
                let fit = local_fit(x, h, data, cfg.degree, exec)?;
                Ok(Prediction {
                    x,
                    method,
                    bandwidth: None,
                    fit,
                })
            }))
        }
    }
}
