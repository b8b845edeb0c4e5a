//! CSV writers for per-replicate records and summaries.

use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

use super::runner::RunRecord;
use super::stats::SummaryRow;

pub const RUNS_HEADER: [&str; 13] = [
    "protocol",
    "n",
    "rep",
    "seed",
    "steps",
    "parallel_time",
    "stop_reason",
    "leaders_final",
    "leaders_at_deadline",
    "estimate",
    "cq_half",
    "ca_half",
    "cq_final",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "protocol", "metric", "n", "count", "mean", "std", "min", "median", "p95", "max",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `runs.csv` rows sorted by `(n, rep)`. Floats use Rust's shortest
/// round-trip decimal form; absent metrics are empty fields.
pub fn emit_runs_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(RUNS_HEADER).map_err(&err)?;
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.n, r.rep));
    for r in sorted {
        w.write_record([
            r.protocol.to_string(),
            r.n.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.steps.to_string(),
            r.parallel_time.to_string(),
            r.stop_reason.to_string(),
            opt(r.leaders_final),
            opt(r.leaders_at_deadline),
            opt(r.estimate),
            opt(r.cq_half),
            opt(r.ca_half),
            opt(r.cq_final),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `summary.csv` rows in the order given.
pub fn emit_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(SUMMARY_HEADER).map_err(&err)?;
    for r in rows {
        w.write_record([
            r.protocol.to_string(),
            r.metric.to_string(),
            r.n.to_string(),
            r.count.to_string(),
            r.mean.to_string(),
            r.std.to_string(),
            r.min.to_string(),
            r.median.to_string(),
            r.p95.to_string(),
            r.max.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
