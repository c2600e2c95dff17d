use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Algorithm;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
    MaxIterations,
    /// The search distribution shrank below the collapse threshold.
    Collapsed,
}

/// End-of-run record, written next to the trace as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub objective: String,
    pub dim: usize,
    pub seed: u64,
    pub population: usize,
    pub beta: f64,
    pub iterations: u64,
    pub evals: u64,
    pub final_best: f64,
    /// Mean fitness of the last batch, the regret of the current search distribution.
    pub final_batch_mean: f64,
    pub final_f_at_mean: Option<f64>,
    /// Mean fitness of the first batch.
    pub initial_batch_mean: Option<f64>,
    pub evals_to_target: Option<u64>,
    pub termination: Termination,
    pub safeguard_activations: u64,
}

impl Summary {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}

/// Linear-interpolation quantile of already sorted values, `p ∈ [0, 1]`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Interquartile range `q75 - q25`.
pub fn iqr(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
}

/// Across-seed statistics for one `(algorithm, objective, dim)` cell.
/// Evals-to-target statistics only cover runs that reached the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub objective: String,
    pub dim: usize,
    pub runs: usize,
    pub median_final_best: f64,
    pub iqr_final_best: f64,
    pub target_hits: usize,
    pub median_evals_to_target: Option<f64>,
    pub iqr_evals_to_target: Option<f64>,
}

pub fn summarize(summaries: &[Summary]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(Algorithm, String, usize), Vec<&Summary>> = BTreeMap::new();
    for s in summaries {
        groups.entry((s.algorithm, s.objective.clone(), s.dim)).or_default().push(s);
    }
    groups
        .into_iter()
        .map(|((algorithm, objective, dim), runs)| {
            let best: Vec<f64> = runs.iter().map(|s| s.final_best).collect();
            let hits: Vec<f64> = runs.iter().filter_map(|s| s.evals_to_target.map(|e| e as f64)).collect();
            let (median_evals_to_target, iqr_evals_to_target) =
                if hits.is_empty() { (None, None) } else { (Some(median(&hits)), Some(iqr(&hits))) };
            AggregateRow {
                algorithm,
                objective,
                dim,
                runs: runs.len(),
                median_final_best: median(&best),
                iqr_final_best: iqr(&best),
                target_hits: hits.len(),
                median_evals_to_target,
                iqr_evals_to_target,
            }
        })
        .collect()
}

pub fn write_table(rows: &[AggregateRow], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_table(path: impl AsRef<Path>) -> Result<Vec<AggregateRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<Vec<AggregateRow>, _>>()?;
    Ok(rows)
}

/// Loads every summary matched by `pattern`. A trace path (`*.csv`) stands for
/// the summary written beside it.
pub fn load_summaries(pattern: &str) -> Result<Vec<Summary>> {
    let paths = glob::glob(pattern).map_err(|e| Error::ConfigInvalid(format!("bad glob `{pattern}`: {e}")))?;
    let mut summaries = Vec::new();
    for entry in paths {
        let path: PathBuf = entry.map_err(|e| Error::IoFailure(e.into()))?;
        let name = path.to_string_lossy();
        let summary_path = if name.ends_with(".summary.json") {
            path.clone()
        } else if path.extension().is_some_and(|e| e == "csv") {
            super::trace::summary_path_for(&path)
        } else {
            continue;
        };
        summaries.push(Summary::read_json(summary_path)?);
    }
    if summaries.is_empty() {
        return Err(Error::ConfigInvalid(format!("no run summaries match `{pattern}`")));
    }
    Ok(summaries)
}
