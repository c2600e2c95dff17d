use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Algorithm, RunConfig};
use super::eval::{matrix_rows, Evaluator};
use super::summary::{Summary, Termination};
use super::trace::TraceRow;
use crate::benchmarks::{reconstruction_value, Benchmark, ObjectiveKind, ObjectiveSpec};
use crate::continuous::{
    DiagonalOptimizer, DiagonalRule, DiagonalSearchState, GaussianOptimizer, GaussianRule, GaussianSearchState,
};
use crate::discrete::{BernoulliIngo, BernoulliState, CategoricalIngo, CategoricalState, GaConfig, GeneticAlgorithm};
use crate::error::{Error, Result};
use crate::gaussian::SpdMatrix;
use crate::AskTell;


const TARGET_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;
const SAMPLE_STREAM: u64 = 3;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th generator of `stream` for a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index)
}

/// Trace and summary of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub summary: Summary,
}

struct Diagnostics {
    f_at_mean: Option<f64>,
    eig: Option<(f64, f64)>,
    safeguard: bool,
    collapsed: bool,
}

trait Driver {
    /// Ask, evaluate and tell once; returns the batch fitness.
    fn iterate(&mut self, n: usize, rng: &mut ChaCha8Rng, evaluator: &Evaluator) -> Result<Vec<f64>>;
    fn diagnostics(&self) -> Diagnostics;
}

struct GaussianDriver {
    opt: GaussianOptimizer,
    f: Benchmark,
    collapse: f64,
}

impl Driver for GaussianDriver {
    fn iterate(&mut self, n: usize, rng: &mut ChaCha8Rng, evaluator: &Evaluator) -> Result<Vec<f64>> {
        let batch = self.opt.ask(n, rng)?;
        let f = self.f;
        let fitness = evaluator.evaluate(&matrix_rows(&batch.candidates), &|r: &Vec<f64>| f.value(r))?;
        self.opt.tell(&batch, &fitness)?;
        Ok(fitness)
    }

    fn diagnostics(&self) -> Diagnostics {
        let state = &self.opt.state;
        let (lo, hi) = state.sigma_eigen_range();
        Diagnostics {
            f_at_mean: Some(self.f.value(state.mu().as_slice())),
            eig: Some((lo, hi)),
            safeguard: state.safeguard_activated,
            collapsed: lo < self.collapse,
        }
    }
}

struct DiagonalDriver {
    opt: DiagonalOptimizer,
    f: Benchmark,
    collapse: f64,
}

impl Driver for DiagonalDriver {
    fn iterate(&mut self, n: usize, rng: &mut ChaCha8Rng, evaluator: &Evaluator) -> Result<Vec<f64>> {
        let batch = self.opt.ask(n, rng)?;
        let f = self.f;
        let fitness = evaluator.evaluate(&matrix_rows(&batch.candidates), &|r: &Vec<f64>| f.value(r))?;
        self.opt.tell(&batch, &fitness)?;
        Ok(fitness)
    }

    fn diagnostics(&self) -> Diagnostics {
        let state = &self.opt.state;
        let lo = 1.0 / state.inv_var.max();
        let hi = 1.0 / state.inv_var.min();
        Diagnostics {
            f_at_mean: Some(self.f.value(state.mu.as_slice())),
            eig: Some((lo, hi)),
            safeguard: state.safeguard_activated,
            collapsed: lo < self.collapse,
        }
    }
}

fn discrete_diagnostics() -> Diagnostics {
    Diagnostics { f_at_mean: None, eig: None, safeguard: false, collapsed: false }
}

struct BinaryDriver<O> {
    opt: O,
    target: Vec<f64>,
}

impl<O: AskTell<Batch = nalgebra::DMatrix<u8>>> Driver for BinaryDriver<O> {
    fn iterate(&mut self, n: usize, rng: &mut ChaCha8Rng, evaluator: &Evaluator) -> Result<Vec<f64>> {
        let batch = self.opt.ask(n, rng)?;
        let w = &self.target;
        let fitness = evaluator.evaluate(&matrix_rows(&batch), &|r: &Vec<u8>| reconstruction_value(r, w))?;
        self.opt.tell(&batch, &fitness)?;
        Ok(fitness)
    }

    fn diagnostics(&self) -> Diagnostics {
        discrete_diagnostics()
    }
}

/// Categorical search over `{1, 2}^d`, where category `k` encodes bit `k - 1`.
struct CategoricalDriver {
    opt: CategoricalIngo,
    target: Vec<f64>,
}

impl Driver for CategoricalDriver {
    fn iterate(&mut self, n: usize, rng: &mut ChaCha8Rng, evaluator: &Evaluator) -> Result<Vec<f64>> {
        let batch = self.opt.ask(n, rng)?;
        let bits = batch.map(|k| (k - 1) as u8);
        let w = &self.target;
        let fitness = evaluator.evaluate(&matrix_rows(&bits), &|r: &Vec<u8>| reconstruction_value(r, w))?;
        self.opt.tell(&batch, &fitness)?;
        Ok(fitness)
    }

    fn diagnostics(&self) -> Diagnostics {
        discrete_diagnostics()
    }
}

/// Runs one seeded experiment to completion.
///
/// Randomness comes from independent streams derived from `config.seed`: one
/// for the reconstruction target, one for the initial point and one generator
/// per iteration, so results do not depend on `config.threads`.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutput> {
    let resolved = config.resolve()?;
    let d = config.dim;
    let objective = ObjectiveSpec::resolve(&config.objective, d, derive_seed(config.seed, TARGET_STREAM, 0))?;
    let evaluator = Evaluator::new(config.threads)?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, INIT_STREAM, 0));

    match (&objective.kind, config.algorithm.is_discrete()) {
        (ObjectiveKind::Continuous(f), false) => {
            let mu = match &config.init.mean {
                Some(m) => DVector::from_column_slice(m),
                None => DVector::from_fn(d, |_, _| init_rng.random::<f64>()),
            };
            let std = resolved.init_std;
            let beta = resolved.beta;
            let f = *f;
            let collapse = config.collapse_eigenvalue;
            let gaussian = |rule: GaussianRule| -> Result<GaussianDriver> {
                let sigma = SpdMatrix::from_diagonal(&vec![std * std; d])?;
                let state = GaussianSearchState::new(mu.clone(), sigma, beta)?;
                Ok(GaussianDriver { opt: GaussianOptimizer::new(state, rule).with_sampler(resolved.sampler), f, collapse })
            };
            let diagonal = |rule: DiagonalRule| -> Result<DiagonalDriver> {
                let state = DiagonalSearchState::isotropic(mu.clone(), std, beta)?;
                Ok(DiagonalDriver { opt: DiagonalOptimizer::new(state, rule).with_sampler(resolved.sampler), f, collapse })
            };
            match config.algorithm {
                Algorithm::Ingo => drive(config, resolved.population, &evaluator, gaussian(GaussianRule::Ingo)?),
                Algorithm::Ingostep => drive(config, resolved.population, &evaluator, gaussian(GaussianRule::IngoStep)?),
                Algorithm::Igo => drive(config, resolved.population, &evaluator, gaussian(GaussianRule::Igo)?),
                Algorithm::Framework => {
                    let rule = GaussianRule::Framework { clip: config.clip };
                    drive(config, resolved.population, &evaluator, gaussian(rule)?)
                }
                Algorithm::FastIngo => drive(config, resolved.population, &evaluator, diagonal(DiagonalRule::FastIngo)?),
                Algorithm::Es => drive(config, resolved.population, &evaluator, diagonal(DiagonalRule::Es)?),
                _ => unreachable!("discrete algorithms are handled below"),
            }
        }
        (ObjectiveKind::BinaryReconstruction { target }, true) => {
            let target = target.clone();
            let n = resolved.population;
            match config.algorithm {
                Algorithm::BernoulliIngo => {
                    let opt = BernoulliIngo { state: BernoulliState::new(d, resolved.beta) };
                    drive(config, n, &evaluator, BinaryDriver { opt, target })
                }
                Algorithm::CategoricalIngo => {
                    let opt = CategoricalIngo { state: CategoricalState::new(d, 2, resolved.beta)? };
                    drive(config, n, &evaluator, CategoricalDriver { opt, target })
                }
                Algorithm::Ga => {
                    let opt = GeneticAlgorithm::new(n, d, GaConfig::default(), &mut init_rng)?;
                    drive(config, n, &evaluator, BinaryDriver { opt, target })
                }
                _ => unreachable!("continuous algorithms are handled above"),
            }
        }
        _ => Err(Error::ConfigInvalid(format!(
            "algorithm `{}` cannot optimize objective `{}`",
            config.algorithm, config.objective
        ))),
    }
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn drive<D: Driver>(config: &RunConfig, n: usize, evaluator: &Evaluator, mut driver: D) -> Result<RunOutput> {
    let resolved = config.resolve()?;
    let started = Instant::now();
    let mut rows = Vec::new();
    let mut pending: Option<TraceRow> = None;
    let mut best = f64::INFINITY;
    let mut evals = 0u64;
    let mut iteration = 0u64;
    let mut evals_to_target = None;
    let mut initial_batch_mean = None;
    let mut safeguard_activations = 0u64;
    let mut final_f_at_mean = None;
    let mut final_batch_mean = f64::NAN;

    let termination = loop {
        if config.max_iterations.is_some_and(|m| iteration >= m) {
            break Termination::MaxIterations;
        }
        if evals + n as u64 > config.budget {
            break Termination::BudgetExhausted;
        }
        iteration += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, SAMPLE_STREAM, iteration));
        let fitness = driver.iterate(n, &mut rng, evaluator)?;
        evals += n as u64;

        let (batch_mean, batch_std) = mean_and_std(&fitness);
        initial_batch_mean.get_or_insert(batch_mean);
        final_batch_mean = batch_mean;
        best = fitness.iter().copied().fold(best, f64::min);
        let hit = config.target.is_some_and(|t| best <= t);
        if hit && evals_to_target.is_none() {
            evals_to_target = Some(evals);
        }
        let diag = driver.diagnostics();
        safeguard_activations += u64::from(diag.safeguard);
        final_f_at_mean = diag.f_at_mean;

        let row = TraceRow {
            iteration,
            evals,
            best_f_so_far: best,
            f_at_mean: diag.f_at_mean,
            batch_mean_f: batch_mean,
            batch_std_f: batch_std,
            min_eig: diag.eig.map(|e| e.0),
            max_eig: diag.eig.map(|e| e.1),
            safeguard_activated: diag.safeguard,
            wall_ms: if config.record_timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        };
        if iteration % config.log_every == 0 {
            rows.push(row);
            pending = None;
        } else {
            pending = Some(row);
        }

        if hit {
            break Termination::TargetReached;
        }
        if diag.collapsed {
            break Termination::Collapsed;
        }
    };
    rows.extend(pending);

    let summary = Summary {
        algorithm: config.algorithm,
        objective: config.objective.clone(),
        dim: config.dim,
        seed: config.seed,
        population: n,
        beta: resolved.beta,
        iterations: iteration,
        evals,
        final_best: best,
        final_batch_mean,
        final_f_at_mean,
        initial_batch_mean,
        evals_to_target,
        termination,
        safeguard_activations,
    };
    Ok(RunOutput { rows, summary })
}
