//! CSV ingestion into sharded datasets.
//!
//! Files are comma-separated with an optional single header line. A first row
//! whose selected cells do not parse as numbers is taken as the header. Each
//! file becomes one shard; a lone file is cut into chunks of
//! [`DEFAULT_CHUNK`] rows instead.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use parstat_core::shard::Source;
use parstat_core::ShardedDataset;

pub const DEFAULT_CHUNK: usize = 1 << 20;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("no files match {0:?}")]
    NoMatch(String),
    #[error("bad glob pattern {pattern:?}: {source}")]
    Pattern {
        pattern: String,
        #[source]
        source: glob::PatternError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: no column {column}")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}, row {row}, column {column}: cannot parse {cell:?} as a number")]
    Parse {
        path: PathBuf,
        row: u64,
        column: usize,
        cell: String,
    },
    #[error("{path}, row {row}, column {column}: non-finite value {cell:?}")]
    NonFinite {
        path: PathBuf,
        row: u64,
        column: usize,
        cell: String,
    },
    #[error("input contains no data rows")]
    Empty,
}

/// Column picked by header name or zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl FromStr for Column {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.to_owned()),
        })
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::Index(i) => write!(f, "{i}"),
            Column::Name(n) => write!(f, "{n:?}"),
        }
    }
}

/// Expands glob patterns into a sorted, de-duplicated file list.
pub fn expand_inputs<S: AsRef<str>>(patterns: &[S]) -> Result<Vec<PathBuf>, IngestError> {
    let mut out = Vec::new();
    for pattern in patterns {
        let pattern = pattern.as_ref();
        let mut matched: Vec<PathBuf> = glob::glob(pattern)
            .map_err(|source| IngestError::Pattern {
                pattern: pattern.to_owned(),
                source,
            })?
            .filter_map(Result::ok)
            .filter(|p| p.is_file())
            .collect();
        if matched.is_empty() {
            return Err(IngestError::NoMatch(pattern.to_owned()));
        }
        matched.sort();
        out.extend(matched);
    }
    out.dedup();
    Ok(out)
}

/// Reads the selected columns of one file, row by row.
fn read_rows(path: &Path, columns: &[Column]) -> Result<Vec<Vec<f64>>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let csv_err = |source| IngestError::Csv {
        path: path.to_owned(),
        source,
    };

    let mut records = reader.records();
    let Some(first) = records.next().transpose().map_err(csv_err)? else {
        return Ok(Vec::new());
    };
    let named = columns.iter().any(|c| matches!(c, Column::Name(_)));
    let looks_numeric = columns.iter().all(|c| match c {
        Column::Index(i) => first.get(*i).is_some_and(|cell| cell.parse::<f64>().is_ok()),
        Column::Name(_) => false,
    });
    let header = named || !looks_numeric;
    let indices = columns
        .iter()
        .map(|c| match c {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => first.iter().position(|h| h == name).ok_or_else(|| IngestError::MissingColumn {
                path: path.to_owned(),
                column: name.clone(),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut parse = |record: &csv::StringRecord, row: u64| -> Result<(), IngestError> {
        let mut out = Vec::with_capacity(indices.len());
        for &column in &indices {
            let cell = record.get(column).ok_or_else(|| IngestError::MissingColumn {
                path: path.to_owned(),
                column: column.to_string(),
            })?;
            let value: f64 = cell.parse().map_err(|_| IngestError::Parse {
                path: path.to_owned(),
                row,
                column,
                cell: cell.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(IngestError::NonFinite {
                    path: path.to_owned(),
                    row,
                    column,
                    cell: cell.to_owned(),
                });
            }
            out.push(value);
        }
        rows.push(out);
        Ok(())
    };
    // rows are numbered from 1 as lines in the file
    if !header {
        parse(&first, 1)?;
    }
    for (i, record) in records.enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        parse(&record, i as u64 + 2)?;
    }
    Ok(rows)
}

fn into_dataset<T>(files: &[PathBuf], per_file: Vec<Vec<T>>, chunk: usize) -> Result<ShardedDataset<T>, IngestError> {
    let source = Source::Files(files.iter().map(|p| p.display().to_string()).collect());
    let mut shards: Vec<Vec<T>> = per_file.into_iter().filter(|s| !s.is_empty()).collect();
    if shards.is_empty() {
        return Err(IngestError::Empty);
    }
    if files.len() == 1 {
        let all = shards.pop().unwrap_or_default();
        let chunk = chunk.max(1);
        let mut it = all.into_iter().peekable();
        while it.peek().is_some() {
            shards.push(it.by_ref().take(chunk).collect());
        }
    }
    ShardedDataset::from_shards(shards, source).map_err(|_| IngestError::Empty)
}

/// One numeric column from every file.
pub fn ingest_csv(files: &[PathBuf], column: &Column, chunk: usize) -> Result<ShardedDataset<f64>, IngestError> {
    let per_file = files
        .iter()
        .map(|f| Ok(read_rows(f, std::slice::from_ref(column))?.into_iter().map(|r| r[0]).collect()))
        .collect::<Result<Vec<Vec<f64>>, IngestError>>()?;
    into_dataset(files, per_file, chunk)
}

/// Two numeric columns `(x, y)` from every file.
pub fn ingest_pairs(
    files: &[PathBuf],
    x: &Column,
    y: &Column,
    chunk: usize,
) -> Result<ShardedDataset<(f64, f64)>, IngestError> {
    let columns = [x.clone(), y.clone()];
    let per_file = files
        .iter()
        .map(|f| Ok(read_rows(f, &columns)?.into_iter().map(|r| (r[0], r[1])).collect()))
        .collect::<Result<Vec<Vec<(f64, f64)>>, IngestError>>()?;
    into_dataset(files, per_file, chunk)
}
