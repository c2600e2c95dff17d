use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One per-iteration log record.
///
/// `min_eig`/`max_eig` are the extreme eigenvalues of `Σ` (the extreme
/// variances for diagonal algorithms). Discrete algorithms leave them and
/// `f_at_mean` empty.
/// `f_at_mean` is a diagnostic evaluation and does not count towards `evals`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub evals: u64,
    pub best_f_so_far: f64,
    pub f_at_mean: Option<f64>,
    pub batch_mean_f: f64,
    pub batch_std_f: f64,
    pub min_eig: Option<f64>,
    pub max_eig: Option<f64>,
    pub safeguard_activated: bool,
    pub wall_ms: f64,
}

pub const TRACE_HEADER: [&str; 10] = [
    "iteration",
    "evals",
    "best_f_so_far",
    "f_at_mean",
    "batch_mean_f",
    "batch_std_f",
    "min_eig",
    "max_eig",
    "safeguard_activated",
    "wall_ms",
];

pub fn write_trace_to<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(TRACE_HEADER)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes a CSV trace with the fixed header; an empty slice yields a header-only file.
pub fn write_trace(rows: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    write_trace_to(rows, File::create(path)?)
}

pub fn read_trace_from<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let rows = reader.deserialize().collect::<std::result::Result<Vec<TraceRow>, _>>()?;
    Ok(rows)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    read_trace_from(File::open(path)?)
}

/// `runs/ingo.csv` → `runs/ingo.summary.json`.
pub fn summary_path_for(trace_path: &Path) -> PathBuf {
    trace_path.with_extension("summary.json")
}
