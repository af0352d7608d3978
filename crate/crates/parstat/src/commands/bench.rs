//! `parstat bench`: Fourier versus binning accuracy against the sort oracle.
//!
//! Each `(J, B)` cell reports the fraction of probabilities where the Fourier
//! estimate is strictly closer to the exact quantile than the binning
//! estimate; ties count against the Fourier method.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use parstat_core::datagen::{generate, GridSpec};
use parstat_core::ShardedDataset;
use serde::{Deserialize, Serialize};

use super::quantile::{estimate, Method, QuantileConfig};
use super::Dist;
use crate::engine::PhaseTimings;
use crate::error::{CliError, CliResult};
use crate::report::RunReport;

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    pub dist: Dist,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of probabilities, i / (k + 1) for i = 1..k.
    #[arg(long, default_value_t = 99)]
    pub p_grid: usize,
    /// Fourier orders.
    #[arg(long, value_delimiter = ',', default_value = "512")]
    pub j: Vec<usize>,
    /// Bin counts.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub bins: Vec<usize>,
    /// Worker counts; each is run in turn.
    #[arg(long, value_delimiter = ',')]
    pub workers: Vec<usize>,
    /// Shard count, fixed so results do not depend on the worker count.
    #[arg(long, default_value_t = 16)]
    pub shards: usize,
    /// Search grid size for the Fourier method.
    #[arg(long, default_value_t = parstat_core::quantile::DEFAULT_GRID_SIZE)]
    pub grid: usize,
    /// Directory for errors.csv, success.csv and timings.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub workers: usize,
    pub method: Method,
    /// J for Fourier, B for binning
    pub param: usize,
    pub p: f64,
    pub estimate: f64,
    pub exact: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub workers: usize,
    pub j: usize,
    pub bins: usize,
    pub wins: usize,
    pub total: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub workers: usize,
    pub method: Method,
    pub param: usize,
    pub map_ms: f64,
    pub reduce_ms: f64,
    pub solve_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    /// rows are the success cells
    pub report: RunReport,
    pub errors: Vec<ErrorRow>,
    pub success: Vec<SuccessRow>,
    pub timings: Vec<TimingRow>,
}

pub fn p_grid(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
}

pub fn run(args: &BenchArgs) -> CliResult<BenchOutcome> {
    if args.n == 0 || args.p_grid == 0 || args.shards == 0 {
        return Err(CliError::Usage("--n, --p-grid and --shards must be positive".into()));
    }
    if args.shards > args.n {
        return Err(CliError::Usage(format!("cannot split {} rows into {} shards", args.n, args.shards)));
    }
    if args.j.is_empty() || args.bins.is_empty() {
        return Err(CliError::Usage("--j and --bins need at least one value".into()));
    }
    let workers = if args.workers.is_empty() {
        vec![crate::Engine::default_workers()]
    } else {
        args.workers.clone()
    };
    let spec = GridSpec::new(args.n, args.dist.into(), args.seed)?;
    let ds = ShardedDataset::partition(generate(&spec), args.shards)?;
    let ps = p_grid(args.p_grid);

    let mut errors = Vec::new();
    let mut success = Vec::new();
    let mut timings = Vec::new();
    let mut total = PhaseTimings::default();
    for &w in &workers {
        let engine = super::engine(Some(w))?;
        let cfg = |method, j, bins| QuantileConfig {
            method,
            p: ps.clone(),
            j,
            bins,
            grid: args.grid,
        };
        let mut t = PhaseTimings::default();
        let exact: Vec<f64> = estimate(&ds, &cfg(Method::Exact, 1, 1), &engine, &mut t)?
            .into_iter()
            .map(|r| r.estimate)
            .collect();
        timings.push(timing_row(w, Method::Exact, 0, &t));
        total.add(&t);

        let mut run_method = |method: Method, param: usize| -> CliResult<Vec<f64>> {
            let (j, bins) = if method == Method::Fourier { (param, 1) } else { (1, param) };
            let mut t = PhaseTimings::default();
            let rows = estimate(&ds, &cfg(method, j, bins), &engine, &mut t)?;
            timings.push(timing_row(w, method, param, &t));
            total.add(&t);
            let errs: Vec<f64> = rows.iter().zip(&exact).map(|(r, e)| (r.estimate - e).abs()).collect();
            for ((r, &e), &err) in rows.iter().zip(&exact).zip(&errs) {
                errors.push(ErrorRow {
                    workers: w,
                    method,
                    param,
                    p: r.p,
                    estimate: r.estimate,
                    exact: e,
                    abs_error: err,
                });
            }
            Ok(errs)
        };
        let fourier = args.j.iter().map(|&j| Ok((j, run_method(Method::Fourier, j)?))).collect::<CliResult<Vec<_>>>()?;
        let binning = args.bins.iter().map(|&b| Ok((b, run_method(Method::Binning, b)?))).collect::<CliResult<Vec<_>>>()?;
        for (j, fe) in &fourier {
            for (b, be) in &binning {
                let wins = fe.iter().zip(be).filter(|(f, b)| f < b).count();
                success.push(SuccessRow {
                    workers: w,
                    j: *j,
                    bins: *b,
                    wins,
                    total: ps.len(),
                    success_rate: wins as f64 / ps.len() as f64,
                });
            }
        }
    }

    let mut report = RunReport::new("bench")
        .param("n", args.n)
        .param("dist", args.dist)
        .param("seed", args.seed)
        .param("p_grid", args.p_grid)
        .param("j", &args.j)
        .param("bins", &args.bins)
        .param("workers", &workers)
        .param("shards", args.shards)
        .param("grid", args.grid);
    report.timings = total;
    for row in &success {
        report.push_row(row);
    }
    let outcome = BenchOutcome {
        report,
        errors,
        success,
        timings,
    };
    if let Some(dir) = &args.out {
        write_tables(dir, &outcome)?;
    }
    Ok(outcome)
}

fn timing_row(workers: usize, method: Method, param: usize, t: &PhaseTimings) -> TimingRow {
    TimingRow {
        workers,
        method,
        param,
        map_ms: t.map_ms,
        reduce_ms: t.reduce_ms,
        solve_ms: t.solve_ms,
    }
}

pub fn write_tables(dir: &Path, outcome: &BenchOutcome) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    write_csv(&dir.join("errors.csv"), &outcome.errors)?;
    write_csv(&dir.join("success.csv"), &outcome.success)?;
    write_csv(&dir.join("timings.csv"), &outcome.timings)
}

fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let wrap = |e: csv::Error| {
        let msg = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path.display().to_string(), io),
            _ => CliError::io(path.display().to_string(), std::io::Error::other(msg)),
        }
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path.display().to_string(), e))
}
