//! `parstat lowess`: local polynomial regression at chosen evaluation points.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use parstat_core::regression::{exact_bandwidth, fit_from_moments, solve_bandwidth, LocalMomentKernel};
use parstat_core::shard::{fold, map_shards};
use parstat_core::summary::TrigMomentKernel;
use parstat_core::{BandwidthSolution, Executor, FourierOrder, LowessConfig, ShardedDataset};
use serde::{Deserialize, Serialize};

use crate::engine::{elapsed_ms, Engine, PhaseTimings};
use crate::error::{CliError, CliResult};
use crate::ingest::{expand_inputs, ingest_pairs, Column, DEFAULT_CHUNK};
use crate::report::RunReport;

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("points").required(true).args(["eval", "eval_grid"]))]
pub struct LowessArgs {
    /// Input CSV files or glob patterns with x and y columns.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<String>,
    #[arg(long, default_value = "0")]
    pub x_column: Column,
    #[arg(long, default_value = "1")]
    pub y_column: Column,
    /// Fraction of the data inside each neighborhood.
    #[arg(long)]
    pub alpha: f64,
    /// Local polynomial degree K.
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Fourier order J.
    #[arg(long, default_value_t = 256)]
    pub j: usize,
    /// Comma-separated evaluation points in (0, 1).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub eval: Option<Vec<f64>>,
    /// Evaluate at i / (n + 1) for i = 1..n.
    #[arg(long)]
    pub eval_grid: Option<usize>,
    /// Use the nearest-neighbor bandwidth from the raw data.
    #[arg(long)]
    pub exact_h: bool,
    /// Bandwidth scan grid size (defaults to max(2048, 4J)).
    #[arg(long)]
    pub root_grid: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Rows per shard when reading a single file.
    #[arg(long, default_value_t = DEFAULT_CHUNK)]
    pub chunk: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowessSettings {
    pub alpha: f64,
    pub degree: usize,
    pub j: usize,
    pub eval: Vec<f64>,
    pub exact_h: bool,
    pub root_grid: Option<usize>,
}

impl LowessSettings {
    fn config(&self) -> CliResult<LowessConfig> {
        let order = FourierOrder::new(self.j).map_err(|_| CliError::Usage("--j must be at least 1".into()))?;
        let mut cfg = LowessConfig::new(self.alpha, self.degree, order, self.eval.clone())?;
        if let Some(g) = self.root_grid {
            cfg = cfg.with_root_grid(g);
            cfg.validate()?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowessRow {
    pub x: f64,
    /// `fourier` or `exact`
    pub method: String,
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_count: Option<usize>,
    pub beta: Option<Vec<f64>>,
    pub mu_hat: Option<f64>,
    pub effective_points: Option<u64>,
    pub error: Option<String>,
}

/// Report plus how many points failed.
#[derive(Debug, Clone)]
pub struct LowessOutcome {
    pub report: RunReport,
    pub failed: usize,
}

impl LowessOutcome {
    pub fn all_failed(&self) -> bool {
        self.failed == self.report.rows.len()
    }
}

pub fn eval_points(args: &LowessArgs) -> Vec<f64> {
    match (&args.eval, args.eval_grid) {
        (Some(e), _) => e.clone(),
        (None, Some(n)) => (1..=n).map(|i| i as f64 / (n + 1) as f64).collect(),
        (None, None) => Vec::new(),
    }
}

pub fn run(args: &LowessArgs) -> CliResult<LowessOutcome> {
    let settings = LowessSettings {
        alpha: args.alpha,
        degree: args.degree,
        j: args.j,
        eval: eval_points(args),
        exact_h: args.exact_h,
        root_grid: args.root_grid,
    };
    settings.config()?;
    let engine = super::engine(args.workers)?;
    let files = expand_inputs(&args.input)?;
    let start = Instant::now();
    let ds = ingest_pairs(&files, &args.x_column, &args.y_column, args.chunk)?;
    let ingest_ms = elapsed_ms(start);
    let mut outcome = outcome_for(&ds, &settings, &engine)?;
    outcome.report.timings.map_ms += ingest_ms;
    outcome.report = outcome.report.param("input", &args.input);
    Ok(outcome)
}

/// Runs `settings` on an in-memory dataset.
pub fn outcome_for(
    ds: &ShardedDataset<(f64, f64)>,
    settings: &LowessSettings,
    engine: &Engine,
) -> CliResult<LowessOutcome> {
    let cfg = settings.config()?;
    let mut report = RunReport::new("lowess")
        .param("alpha", settings.alpha)
        .param("degree", settings.degree)
        .param("j", settings.j)
        .param("root_grid", cfg.root_grid)
        .param("exact_h", settings.exact_h)
        .param("n", ds.total_count())
        .param("shards", ds.shard_count());
    let rows = rows_for(ds, &cfg, settings.exact_h, engine, &mut report.timings)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    for row in rows {
        report.push_row(row);
    }
    Ok(LowessOutcome { report, failed })
}

pub fn rows_for(
    ds: &ShardedDataset<(f64, f64)>,
    cfg: &LowessConfig,
    exact_h: bool,
    engine: &Engine,
    timings: &mut PhaseTimings,
) -> CliResult<Vec<LowessRow>> {
    let method = if exact_h { "exact" } else { "fourier" };
    let bandwidths: Vec<parstat_core::Result<(f64, Option<BandwidthSolution>)>> = if exact_h {
        let start = Instant::now();
        let xs: Vec<f64> = ds.iter().map(|p| p.0).collect();
        timings.map_ms += elapsed_ms(start);
        let start = Instant::now();
        let out = engine.map(&cfg.eval_points, |_, &x| Ok((exact_bandwidth(&xs, x, cfg.alpha)?, None)));
        timings.solve_ms += elapsed_ms(start);
        out
    } else {
        let tm = engine.map_reduce_timed(ds, &TrigMomentKernel::new(cfg.order), timings)?;
        let start = Instant::now();
        let out = engine.map(&cfg.eval_points, |_, &x| {
            let bw = solve_bandwidth(x, cfg, &tm)?;
            Ok((bw.h_hat, Some(bw)))
        });
        timings.solve_ms += elapsed_ms(start);
        out
    };

    let mut rows = Vec::with_capacity(bandwidths.len());
    for (&x, bw) in cfg.eval_points.iter().zip(bandwidths) {
        let mut row = LowessRow {
            x,
            method: method.to_owned(),
            h: None,
            bandwidth_residual: None,
            root_count: None,
            beta: None,
            mu_hat: None,
            effective_points: None,
            error: None,
        };
        let (h, solution) = match bw {
            Ok(v) => v,
            Err(e) => {
                row.error = Some(e.to_string());
                rows.push(row);
                continue;
            }
        };
        row.h = Some(h);
        row.bandwidth_residual = solution.map(|s| s.residual);
        row.root_count = solution.map(|s| s.root_count);
        if !(h > 0.0) {
            row.error = Some(parstat_core::Error::DegenerateNeighborhood { x, h }.to_string());
            rows.push(row);
            continue;
        }

        let start = Instant::now();
        let parts = map_shards(ds, &LocalMomentKernel { x, h, degree: cfg.degree }, engine)?;
        timings.map_ms += elapsed_ms(start);
        let start = Instant::now();
        let acc = fold(&parts)?;
        timings.reduce_ms += elapsed_ms(start);
        let start = Instant::now();
        let fit = fit_from_moments(x, h, &acc);
        timings.solve_ms += elapsed_ms(start);
        match fit {
            Ok(fit) => {
                row.mu_hat = Some(fit.mu_hat);
                row.effective_points = Some(fit.effective_weight_count);
                row.beta = Some(fit.beta);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(rows)
}
