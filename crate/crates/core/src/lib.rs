//! Implicit natural gradient optimization (INGO) for black-box problems.
//!
//! Gaussian search distributions are updated through their natural
//! parameters `(Σ⁻¹μ, -½Σ⁻¹)`; discrete variants do the same for Bernoulli and
//! categorical distributions. Every optimizer exposes an ask/tell interface
//! and can be driven directly or through [`harness::run_experiment`].
//!
//! Runnable examples live in `crates/core/examples`:
//!
//! ```bash
//! cargo run --release --example ingo_ellipsoid
//! ```
//!
//! - `ingo_ellipsoid`: full-matrix INGO through [`AskTell`]
//! - `ingostep_vs_ingo`: the two mean updates on identical batches
//! - `fast_ingo`: diagonal variant on separable problems
//! - `framework_orthogonal`: clipped framework step with orthogonal directions
//! - `baselines`: INGO next to IGO and antithetic ES
//! - `bernoulli_reconstruction`: binary INGO against the GA baseline
//! - `categorical`: K-way categorical INGO
//! - `experiment_sweep`: seeded sweep, traces and summary table
//! - `natural_gradient_check`: Fisher matrix and the natural-gradient identity

pub mod benchmarks;
pub mod continuous;
pub mod discrete;
pub mod error;
pub mod estimators;
pub mod gaussian;
pub mod harness;

use rand::Rng;

pub use benchmarks::{eval_benchmark, eval_binary_reconstruction, Benchmark, ObjectiveSpec};
pub use continuous::{
    AskResult, ClipBounds, DiagonalOptimizer, DiagonalRule, DiagonalSearchState, GaussianOptimizer, GaussianRule,
    GaussianSearchState, SafeguardBounds,
};
pub use discrete::{BernoulliIngo, BernoulliState, CategoricalIngo, CategoricalState, GaConfig, GeneticAlgorithm};
pub use error::{Error, Result};
pub use estimators::{DirectionBatch, DirectionKind, GradientEstimate, ShapedFitness};
pub use gaussian::{GaussianParams, SpdMatrix};

/// Sampling and update interface shared by all optimizers.
pub trait AskTell {
    type Batch;

    /// Draws `n` candidates from the current search distribution.
    fn ask<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Self::Batch>;

    /// Updates the distribution from the fitness of a batch returned by [`AskTell::ask`].
    fn tell(&mut self, batch: &Self::Batch, fitness: &[f64]) -> Result<()>;
}
