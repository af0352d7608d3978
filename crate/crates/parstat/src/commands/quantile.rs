//! `parstat quantile`: sample quantiles by Fourier approximation, binning, or sorting.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use parstat_core::quantile::{binning_quantile_indexed, solve_quantiles_with, sorted_quantile};
use parstat_core::summary::{BinCountKernel, MomentKernel, MomentSummary, TrigMomentKernel};
use parstat_core::{FourierOrder, QuantileRequest, RescaleMap, ShardedDataset};
use serde::{Deserialize, Serialize};

use super::check_probabilities;
use crate::engine::{elapsed_ms, Engine, PhaseTimings};
use crate::error::{CliError, CliResult};
use crate::ingest::{expand_inputs, ingest_csv, Column, DEFAULT_CHUNK};
use crate::report::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Fourier,
    Binning,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct QuantileArgs {
    /// Input CSV files or glob patterns.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<String>,
    /// Column name or zero-based index.
    #[arg(long, default_value = "0")]
    pub column: Column,
    /// Comma-separated probabilities in (0, 1).
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub p: Vec<f64>,
    /// Fourier order J.
    #[arg(long, default_value_t = 256)]
    pub j: usize,
    #[arg(long, value_enum, default_value_t = Method::Fourier)]
    pub method: Method,
    /// Number of equispaced bins for the binning method.
    #[arg(long, default_value_t = 1000)]
    pub bins: usize,
    /// Search grid size for the Fourier method.
    #[arg(long, default_value_t = parstat_core::quantile::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Rows per shard when reading a single file.
    #[arg(long, default_value_t = DEFAULT_CHUNK)]
    pub chunk: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What to estimate, independent of where the data comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileConfig {
    pub method: Method,
    pub p: Vec<f64>,
    pub j: usize,
    pub bins: usize,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub p: f64,
    pub estimate: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_flag: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin: Option<usize>,
}

impl QuantileRow {
    fn plain(p: f64, estimate: f64, method: Method) -> Self {
        Self {
            p,
            estimate,
            method,
            theta_hat: None,
            derivative_residual: None,
            boundary_flag: None,
            bin: None,
        }
    }
}

pub fn run(args: &QuantileArgs) -> CliResult<RunReport> {
    let cfg = QuantileConfig {
        method: args.method,
        p: args.p.clone(),
        j: args.j,
        bins: args.bins,
        grid: args.grid,
    };
    validate(&cfg)?;
    let engine = super::engine(args.workers)?;
    let files = expand_inputs(&args.input)?;
    let mut timings = PhaseTimings::default();
    let start = Instant::now();
    let ds = ingest_csv(&files, &args.column, args.chunk)?;
    timings.map_ms += elapsed_ms(start);
    let mut report = report_for(&ds, &cfg, &engine)?;
    report.timings.add(&timings);
    Ok(report.param("input", &args.input).param("column", args.column.to_string()))
}

/// Runs `cfg` on an in-memory dataset.
pub fn report_for(ds: &ShardedDataset<f64>, cfg: &QuantileConfig, engine: &Engine) -> CliResult<RunReport> {
    let mut report = RunReport::new("quantile")
        .param("method", cfg.method)
        .param("p", &cfg.p)
        .param("n", ds.total_count())
        .param("shards", ds.shard_count());
    report = match cfg.method {
        Method::Fourier => report.param("j", cfg.j).param("grid", cfg.grid),
        Method::Binning => report.param("bins", cfg.bins),
        Method::Exact => report,
    };
    for row in estimate(ds, cfg, engine, &mut report.timings)? {
        report.push_row(row);
    }
    Ok(report)
}

pub fn validate(cfg: &QuantileConfig) -> CliResult<()> {
    check_probabilities(&cfg.p)?;
    match cfg.method {
        Method::Fourier if cfg.j == 0 => Err(CliError::Usage("--j must be at least 1".into())),
        Method::Fourier if cfg.grid < parstat_core::quantile::MIN_GRID_SIZE => Err(CliError::Usage(format!(
            "--grid must be at least {}",
            parstat_core::quantile::MIN_GRID_SIZE
        ))),
        Method::Binning if cfg.bins == 0 => Err(CliError::Usage("--bins must be at least 1".into())),
        _ => Ok(()),
    }
}

/// One row per requested probability, in request order.
pub fn estimate(
    ds: &ShardedDataset<f64>,
    cfg: &QuantileConfig,
    engine: &Engine,
    timings: &mut PhaseTimings,
) -> CliResult<Vec<QuantileRow>> {
    validate(cfg)?;
    match cfg.method {
        Method::Exact => {
            let start = Instant::now();
            let mut sorted = ds.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            let rows = cfg
                .p
                .iter()
                .map(|&p| Ok(QuantileRow::plain(p, sorted_quantile(&sorted, p)?, Method::Exact)))
                .collect::<CliResult<Vec<_>>>();
            timings.solve_ms += elapsed_ms(start);
            rows
        }
        Method::Binning => {
            let range = engine.map_reduce_timed(ds, &MomentKernel, timings)?;
            let (lo, hi) = bin_range(&range);
            let kernel = BinCountKernel::equispaced(lo, hi, cfg.bins)?;
            let bc = engine.map_reduce_timed(ds, &kernel, timings)?;
            let start = Instant::now();
            let rows = cfg
                .p
                .iter()
                .map(|&p| {
                    let (estimate, bin) = binning_quantile_indexed(&bc, p)?;
                    Ok(QuantileRow {
                        bin: Some(bin),
                        ..QuantileRow::plain(p, estimate, Method::Binning)
                    })
                })
                .collect::<CliResult<Vec<_>>>();
            timings.solve_ms += elapsed_ms(start);
            rows
        }
        Method::Fourier => {
            let order = FourierOrder::new(cfg.j)?;
            let range = engine.map_reduce_timed(ds, &MomentKernel, timings)?;
            if range.min() == range.max() {
                // constant data: every quantile is that value
                return Ok(cfg
                    .p
                    .iter()
                    .map(|&p| QuantileRow {
                        theta_hat: Some(0.0),
                        derivative_residual: Some(0.0),
                        boundary_flag: Some(true),
                        ..QuantileRow::plain(p, range.min(), Method::Fourier)
                    })
                    .collect());
            }
            let scale = RescaleMap::new(range.min(), range.max())?;
            let tm = engine.map_reduce_timed(ds, &TrigMomentKernel::new(order).with_rescale(scale), timings)?;
            let start = Instant::now();
            let req = QuantileRequest::new(cfg.p.clone(), order)?.with_grid_size(cfg.grid);
            let solutions = solve_quantiles_with(&req, &tm, &scale, engine)?;
            timings.solve_ms += elapsed_ms(start);
            Ok(solutions
                .into_iter()
                .map(|s| QuantileRow {
                    theta_hat: Some(s.theta_hat),
                    derivative_residual: Some(s.derivative_residual),
                    boundary_flag: Some(s.boundary_flag),
                    ..QuantileRow::plain(s.p, s.unscaled, Method::Fourier)
                })
                .collect())
        }
    }
}

/// Bin edges span the data range; a constant sample gets a unit-width bin.
fn bin_range(m: &MomentSummary) -> (f64, f64) {
    if m.min() < m.max() {
        (m.min(), m.max())
    } else {
        (m.min() - 0.5, m.min() + 0.5)
    }
}
