use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Algorithm, InitConfig, RunConfig, Setting, DEFAULT_COLLAPSE_EIGENVALUE};
use super::runner::run_experiment;
use super::summary::Summary;
use super::trace::{summary_path_for, write_trace};
use crate::continuous::ClipBounds;
use crate::error::{Error, Result};
use crate::estimators::DirectionKind;

/// A scalar or a list; lists are crossed with every other list in the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn one() -> usize {
    1
}

fn one_u64() -> u64 {
    1
}

fn default_collapse() -> f64 {
    DEFAULT_COLLAPSE_EIGENVALUE
}

/// Grid of runs read from JSON by `ingo sweep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub algorithm: OneOrMany<Algorithm>,
    pub objective: OneOrMany<String>,
    pub dim: OneOrMany<usize>,
    pub seed: OneOrMany<u64>,
    pub budget: u64,
    #[serde(default)]
    pub population: Setting<usize>,
    #[serde(default)]
    pub beta: Setting<f64>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default = "one")]
    pub threads: usize,
    #[serde(default)]
    pub sampler: Option<DirectionKind>,
    #[serde(default)]
    pub clip: Option<ClipBounds>,
    #[serde(default)]
    pub max_iterations: Option<u64>,
    #[serde(default = "default_collapse")]
    pub collapse_eigenvalue: f64,
    #[serde(default = "one_u64")]
    pub log_every: u64,
    #[serde(default)]
    pub record_timing: bool,
    /// Directory receiving one trace and one summary per run.
    pub out_dir: PathBuf,
}

impl SweepConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Every run of the grid, in algorithm, objective, dim, seed order.
    pub fn expand(&self) -> Vec<RunConfig> {
        let mut runs = Vec::new();
        for algorithm in self.algorithm.values() {
            for objective in self.objective.values() {
                for dim in self.dim.values() {
                    for seed in self.seed.values() {
                        runs.push(RunConfig {
                            algorithm,
                            objective: objective.clone(),
                            dim,
                            population: self.population,
                            beta: self.beta,
                            seed,
                            budget: self.budget,
                            target: self.target,
                            init: self.init.clone(),
                            threads: self.threads,
                            sampler: self.sampler,
                            clip: self.clip,
                            max_iterations: self.max_iterations,
                            collapse_eigenvalue: self.collapse_eigenvalue,
                            log_every: self.log_every,
                            record_timing: self.record_timing,
                        });
                    }
                }
            }
        }
        runs
    }
}

/// `{algorithm}_{objective}_d{dim}_s{seed}.csv`
pub fn trace_file_name(config: &RunConfig) -> String {
    format!("{}_{}_d{}_s{}.csv", config.algorithm, config.objective, config.dim, config.seed)
}

/// Runs `config` and writes its trace to `path` and its summary beside it.
pub fn run_to_files(config: &RunConfig, path: &Path) -> Result<Summary> {
    let out = run_experiment(config)?;
    write_trace(&out.rows, path)?;
    out.summary.write_json(summary_path_for(path))?;
    Ok(out.summary)
}

/// Validates the whole grid first, then runs it.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<Summary>> {
    let runs = config.expand();
    if runs.is_empty() {
        return Err(Error::ConfigInvalid("sweep expands to no runs".into()));
    }
    for run in &runs {
        run.resolve()?;
    }
    std::fs::create_dir_all(&config.out_dir)?;
    runs.iter().map(|run| run_to_files(run, &config.out_dir.join(trace_file_name(run)))).collect()
}
