//! `parstat gen`: quantile-grid fixtures written as one CSV per shard.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use parstat_core::datagen::{generate, generate_regression, GridSpec, MeanFunction};
use parstat_core::ShardedDataset;
use serde::Serialize;

use super::Dist;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mu {
    /// 2x
    Linear,
    /// sin(2πx)
    Sine,
}

impl From<Mu> for MeanFunction {
    fn from(m: Mu) -> Self {
        match m {
            Mu::Linear => MeanFunction::Linear,
            Mu::Sine => MeanFunction::Sine,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Number of grid points.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    pub dist: Dist,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub shards: u64,
    /// Also write a response column y = mu(x) + noise.
    #[arg(long, value_enum)]
    pub mu: Option<Mu>,
    /// Standard deviation of the Gaussian noise added to y.
    #[arg(long, default_value_t = 0.0, requires = "mu")]
    pub noise_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Manifest {
    pub n: u64,
    pub dist: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub files: Vec<ManifestFile>,
}

pub fn run(args: &GenArgs) -> CliResult<Manifest> {
    let n = usize::try_from(args.n).map_err(|_| CliError::Usage("--n is too large".into()))?;
    let shards = args.shards as usize;
    if shards > n {
        return Err(CliError::Usage(format!("cannot split {n} rows into {shards} shards")));
    }
    let spec = GridSpec::new(n, args.dist.into(), args.seed)?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::io(args.out.display().to_string(), e))?;

    let (columns, rows): (Vec<String>, Vec<Vec<f64>>) = match args.mu {
        None => (vec!["x".into()], generate(&spec).into_iter().map(|x| vec![x]).collect()),
        Some(mu) => {
            if !(args.noise_sd >= 0.0 && args.noise_sd.is_finite()) {
                return Err(CliError::Usage("--noise-sd must be finite and nonnegative".into()));
            }
            let pairs = generate_regression(&spec, mu.into(), args.noise_sd)?;
            (vec!["x".into(), "y".into()], pairs.into_iter().map(|(x, y)| vec![x, y]).collect())
        }
    };
    let ds = ShardedDataset::partition(rows, shards)?;
    let files = ds
        .shards()
        .iter()
        .enumerate()
        .map(|(r, shard)| {
            let path = args.out.join(format!("part-{r:05}.csv"));
            write_shard(&path, &columns, shard)?;
            Ok(ManifestFile {
                path: path.display().to_string(),
                rows: shard.len(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Manifest {
        n: args.n,
        dist: format!("{:?}", args.dist).to_lowercase(),
        seed: args.seed,
        columns,
        files,
    })
}

fn write_shard(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> CliResult<()> {
    let io = |e| CliError::io(path.display().to_string(), e);
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    writeln!(w, "{}", columns.join(",")).map_err(io)?;
    for row in rows {
        // `{}` on f64 prints the shortest text that reads back to the same bits
        let line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}
