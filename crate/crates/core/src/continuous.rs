//! Ask/tell optimizers over Gaussian search distributions.
//!
//! [`GaussianSearchState`] stores the precision matrix `Σ⁻¹` as the
//! authoritative quantity and caches `Σ`, `Σ^{1/2}` and `Σ^{-1/2}` from one
//! eigendecomposition per iteration. The implicit natural gradient rule
//! updates `Σ⁻¹` additively:
//!
//! ```text
//! Σ⁻¹_{t+1} = Σ⁻¹_t + β Σ_i (h_i/N) Σ_t^{-1/2} z_i z_iᵀ Σ_t^{-1/2}
//! μ_{t+1}   = μ_t − β Σ_{t+1} Σ_t^{-1/2} Σ_i (h_i/N) z_i
//! ```
//!
//! The step variant uses `Σ_t^{1/2}` in the mean line, the IGO baseline updates
//! `Σ` itself, and [`GaussianSearchState::framework_step`] applies externally
//! supplied `(ĝ, Ĝ)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    clip_g, grad_estimates_with_factor, shape_fitness, DirectionBatch, DirectionKind, GradientEstimate, ShapedFitness,
};
use crate::gaussian::{
    affine_rows, check_symmetric, eigh, spectral_map, GaussianParams, SpdMatrix, DEFAULT_CEIL, DEFAULT_RELATIVE_FLOOR,
};
use crate::AskTell;

/// Eigenvalue window enforced after every matrix update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SafeguardBounds {
    /// Floor is `relative_floor * max(λ_max, 1)`.
    pub relative_floor: f64,
    pub ceil: f64,
}

impl Default for SafeguardBounds {
    fn default() -> Self {
        Self { relative_floor: DEFAULT_RELATIVE_FLOOR, ceil: DEFAULT_CEIL }
    }
}

impl SafeguardBounds {
    fn clamp_spectrum(&self, m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
        let eig = eigh(m);
        let floor = self.relative_floor * eig.eigenvalues.max().max(1.0);
        let clamped = eig.eigenvalues.iter().any(|&l| !(l >= floor && l <= self.ceil));
        if !clamped {
            return (m.clone(), false);
        }
        (spectral_map(&eig, |l| l.clamp(floor, self.ceil)), true)
    }

    /// Diagonal entries are decoupled, so their floor is absolute: `relative_floor * 1`.
    fn clamp_values(&self, v: &mut DVector<f64>) -> bool {
        let floor = self.relative_floor;
        let mut clamped = false;
        for x in v.iter_mut() {
            if !(*x >= floor && *x <= self.ceil) {
                *x = if x.is_nan() { floor } else { x.clamp(floor, self.ceil) };
                clamped = true;
            }
        }
        clamped
    }
}

/// Candidates drawn by `ask`: `x_i = μ + Σ^{1/2} z_i` row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct AskResult {
    pub directions: DirectionBatch,
    pub candidates: DMatrix<f64>,
}

impl AskResult {
    pub fn len(&self) -> usize {
        self.candidates.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.nrows() == 0
    }
}

/// Full-covariance Gaussian search distribution.
#[derive(Clone, Debug)]
pub struct GaussianSearchState {
    pub params: GaussianParams,
    /// `Σ⁻¹`, the stored authority.
    pub inv_sigma: SpdMatrix,
    pub sqrt_sigma: SpdMatrix,
    pub inv_sqrt_sigma: SpdMatrix,
    pub iteration: u64,
    pub beta: f64,
    pub evals: u64,
    pub bounds: SafeguardBounds,
    /// Whether the last update had to clamp the spectrum.
    pub safeguard_activated: bool,
    sigma_eigen_range: (f64, f64),
}

impl GaussianSearchState {
    pub fn new(mu: DVector<f64>, sigma: SpdMatrix, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let params = GaussianParams::new(mu, sigma)?;
        Ok(Self::from_covariance_unchecked(params.mu, params.sigma.into_inner(), beta, SafeguardBounds::default()))
    }

    /// Starts from a precision matrix `Σ⁻¹` instead of a covariance.
    pub fn from_precision(mu: DVector<f64>, precision: SpdMatrix, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if mu.len() != precision.dim() {
            return Err(Error::DimMismatch { expected: precision.dim(), found: mu.len() });
        }
        Ok(Self::from_precision_unchecked(mu, precision.into_inner(), beta, SafeguardBounds::default()))
    }

    pub fn with_bounds(mut self, bounds: SafeguardBounds) -> Self {
        self.bounds = bounds;
        self
    }

    fn from_precision_unchecked(mu: DVector<f64>, precision: DMatrix<f64>, beta: f64, bounds: SafeguardBounds) -> Self {
        let eig = eigh(&precision);
        let sigma = spectral_map(&eig, |l| 1.0 / l);
        let sqrt_sigma = spectral_map(&eig, |l| 1.0 / l.sqrt());
        let inv_sqrt_sigma = spectral_map(&eig, |l| l.sqrt());
        let range = (1.0 / eig.eigenvalues.max(), 1.0 / eig.eigenvalues.min());
        Self {
            params: GaussianParams { mu, sigma: SpdMatrix::new_unchecked(sigma) },
            inv_sigma: SpdMatrix::new_unchecked(precision),
            sqrt_sigma: SpdMatrix::new_unchecked(sqrt_sigma),
            inv_sqrt_sigma: SpdMatrix::new_unchecked(inv_sqrt_sigma),
            iteration: 0,
            beta,
            evals: 0,
            bounds,
            safeguard_activated: false,
            sigma_eigen_range: range,
        }
    }

    fn from_covariance_unchecked(mu: DVector<f64>, sigma: DMatrix<f64>, beta: f64, bounds: SafeguardBounds) -> Self {
        let eig = eigh(&sigma);
        let inv_sigma = spectral_map(&eig, |l| 1.0 / l);
        let sqrt_sigma = spectral_map(&eig, |l| l.sqrt());
        let inv_sqrt_sigma = spectral_map(&eig, |l| 1.0 / l.sqrt());
        let range = (eig.eigenvalues.min(), eig.eigenvalues.max());
        Self {
            params: GaussianParams { mu, sigma: SpdMatrix::new_unchecked(sigma) },
            inv_sigma: SpdMatrix::new_unchecked(inv_sigma),
            sqrt_sigma: SpdMatrix::new_unchecked(sqrt_sigma),
            inv_sqrt_sigma: SpdMatrix::new_unchecked(inv_sqrt_sigma),
            iteration: 0,
            beta,
            evals: 0,
            bounds,
            safeguard_activated: false,
            sigma_eigen_range: range,
        }
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.params.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.params.sigma
    }

    /// Smallest and largest eigenvalue of `Σ`.
    pub fn sigma_eigen_range(&self) -> (f64, f64) {
        self.sigma_eigen_range
    }

    /// Samples `n` i.i.d. candidates. Does not touch the state.
    pub fn ask<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<AskResult> {
        self.ask_with(DirectionKind::Iid, n, rng)
    }

    pub fn ask_with<R: Rng + ?Sized>(&self, kind: DirectionKind, n: usize, rng: &mut R) -> Result<AskResult> {
        if n < 2 {
            return Err(Error::BatchTooSmall { size: n });
        }
        let directions = DirectionBatch::draw(kind, n, self.dim(), rng)?;
        Ok(self.candidates_for(directions))
    }

    /// Maps given directions to candidates `μ + Σ^{1/2} z`.
    pub fn candidates_for(&self, directions: DirectionBatch) -> AskResult {
        let candidates = affine_rows(&self.params.mu, &self.sqrt_sigma, &directions.z);
        AskResult { directions, candidates }
    }

    fn shape(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<ShapedFitness> {
        if z.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: z.dim() });
        }
        if z.len() != fitness.len() {
            return Err(Error::DimMismatch { expected: z.len(), found: fitness.len() });
        }
        shape_fitness(fitness)
    }

    fn unchanged(&self, evaluations: usize) -> Self {
        let mut next = self.clone();
        next.iteration += 1;
        next.evals += evaluations as u64;
        next.safeguard_activated = false;
        next
    }

    /// Batch estimate `(ĝ, Ĝ)` at the current state.
    pub fn estimate(&self, z: &DirectionBatch, shaped: &ShapedFitness) -> Result<GradientEstimate> {
        grad_estimates_with_factor(&self.inv_sqrt_sigma, z, shaped)
    }

    /// `Σ⁻¹ + 2βĜ`, safeguarded, with caches rebuilt. The mean is left as is.
    fn precision_step(&self, g_sigma: &DMatrix<f64>) -> Self {
        let raw = self.inv_sigma.as_matrix() + g_sigma * (2.0 * self.beta);
        let (precision, clamped) = self.bounds.clamp_spectrum(&raw);
        let mut next = Self::from_precision_unchecked(self.params.mu.clone(), precision, self.beta, self.bounds);
        next.iteration = self.iteration + 1;
        next.evals = self.evals;
        next.safeguard_activated = clamped;
        next
    }

    /// `Σ_i (h_i/N) z_i`.
    fn weighted_direction(z: &DirectionBatch, shaped: &ShapedFitness) -> DVector<f64> {
        let n = z.len() as f64;
        let mut s = DVector::zeros(z.dim());
        for (i, &h) in shaped.weights.iter().enumerate() {
            s.axpy(h / n, &z.z.row(i).transpose(), 1.0);
        }
        s
    }

    /// One INGO iteration.
    pub fn ingo_tell(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<Self> {
        let shaped = self.shape(z, fitness)?;
        if shaped.degenerate {
            return Ok(self.unchanged(fitness.len()));
        }
        let est = self.estimate(z, &shaped)?;
        let mut next = self.precision_step(&est.g_sigma);
        next.params.mu = &self.params.mu - next.params.sigma.as_matrix() * &est.g_mu * self.beta;
        next.evals += fitness.len() as u64;
        Ok(next)
    }

    /// One INGOstep iteration: same precision update, mean moved with `Σ_t^{1/2}`.
    pub fn ingostep_tell(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<Self> {
        let shaped = self.shape(z, fitness)?;
        if shaped.degenerate {
            return Ok(self.unchanged(fitness.len()));
        }
        let est = self.estimate(z, &shaped)?;
        let mut next = self.precision_step(&est.g_sigma);
        let s = Self::weighted_direction(z, &shaped);
        next.params.mu = &self.params.mu - self.sqrt_sigma.as_matrix() * s * self.beta;
        next.evals += fitness.len() as u64;
        Ok(next)
    }

    /// Explicit natural-gradient baseline acting on `Σ` rather than `Σ⁻¹`.
    pub fn igo_tell(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<Self> {
        let shaped = self.shape(z, fitness)?;
        if shaped.degenerate {
            return Ok(self.unchanged(fitness.len()));
        }
        let n = z.len() as f64;
        let d = self.dim();
        let sigma = self.params.sigma.as_matrix();
        // rows of y are Σ^{1/2} z_i
        let y = &z.z * self.sqrt_sigma.as_matrix();
        let mut increment = DMatrix::zeros(d, d);
        for (i, &h) in shaped.weights.iter().enumerate() {
            let yi = y.row(i).transpose();
            increment.ger(h / n, &yi, &yi, 1.0);
            increment -= sigma * (h / n);
        }
        let raw = crate::gaussian::symmetrize(sigma - increment * self.beta);
        let (cov, clamped) = self.bounds.clamp_spectrum(&raw);
        let s = Self::weighted_direction(z, &shaped);
        let mu = &self.params.mu - self.sqrt_sigma.as_matrix() * s * self.beta;
        let mut next = Self::from_covariance_unchecked(mu, cov, self.beta, self.bounds);
        next.iteration = self.iteration + 1;
        next.evals = self.evals + fitness.len() as u64;
        next.safeguard_activated = clamped;
        Ok(next)
    }

    /// General framework update `Σ⁻¹ += 2βĜ`, `μ -= β Σ_{t+1} ĝ`.
    pub fn framework_step(&self, g_hat: &DVector<f64>, g_sigma_hat: &DMatrix<f64>) -> Result<Self> {
        if g_hat.len() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: g_hat.len() });
        }
        if g_sigma_hat.nrows() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: g_sigma_hat.nrows() });
        }
        check_symmetric(g_sigma_hat)?;
        let mut next = self.precision_step(g_sigma_hat);
        next.params.mu = &self.params.mu - next.params.sigma.as_matrix() * g_hat * self.beta;
        Ok(next)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::ConfigInvalid(format!("step size must be positive, got {beta}")));
    }
    Ok(())
}

/// Eigenvalue window `b I ⪯ Ĝ ⪯ (γ/2) I` used in framework mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipBounds {
    pub b: f64,
    pub gamma_half: f64,
}

/// Update rule applied by [`GaussianOptimizer::tell`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaussianRule {
    Ingo,
    IngoStep,
    Igo,
    /// Batch `(ĝ, Ĝ)` fed to the framework step; `Ĝ` is clipped when bounds are given.
    Framework { clip: Option<ClipBounds> },
}

#[derive(Clone, Debug)]
pub struct GaussianOptimizer {
    pub state: GaussianSearchState,
    pub rule: GaussianRule,
    pub sampler: DirectionKind,
}

impl GaussianOptimizer {
    pub fn new(state: GaussianSearchState, rule: GaussianRule) -> Self {
        Self { state, rule, sampler: DirectionKind::Iid }
    }

    pub fn with_sampler(mut self, sampler: DirectionKind) -> Self {
        self.sampler = sampler;
        self
    }
}

impl AskTell for GaussianOptimizer {
    type Batch = AskResult;

    fn ask<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<AskResult> {
        self.state.ask_with(self.sampler, n, rng)
    }

    fn tell(&mut self, batch: &AskResult, fitness: &[f64]) -> Result<()> {
        let z = &batch.directions;
        self.state = match self.rule {
            GaussianRule::Ingo => self.state.ingo_tell(z, fitness)?,
            GaussianRule::IngoStep => self.state.ingostep_tell(z, fitness)?,
            GaussianRule::Igo => self.state.igo_tell(z, fitness)?,
            GaussianRule::Framework { clip } => {
                let shaped = self.state.shape(z, fitness)?;
                if shaped.degenerate {
                    self.state.unchanged(fitness.len())
                } else {
                    let est = self.state.estimate(z, &shaped)?;
                    let g_sigma = match clip {
                        Some(c) => clip_g(&est.g_sigma, c.b, c.gamma_half)?.into_inner(),
                        None => est.g_sigma,
                    };
                    let mut next = self.state.framework_step(&est.g_mu, &g_sigma)?;
                    next.evals += fitness.len() as u64;
                    next
                }
            }
        };
        Ok(())
    }
}

/// Diagonal Gaussian: per-coordinate precision `σ_j⁻²`.
#[derive(Clone, Debug)]
pub struct DiagonalSearchState {
    pub mu: DVector<f64>,
    pub inv_var: DVector<f64>,
    pub beta: f64,
    pub iteration: u64,
    pub evals: u64,
    pub bounds: SafeguardBounds,
    pub safeguard_activated: bool,
}

impl DiagonalSearchState {
    pub fn new(mu: DVector<f64>, variances: DVector<f64>, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if mu.len() != variances.len() {
            return Err(Error::DimMismatch { expected: mu.len(), found: variances.len() });
        }
        if variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self {
            inv_var: variances.map(|v| 1.0 / v),
            mu,
            beta,
            iteration: 0,
            evals: 0,
            bounds: SafeguardBounds::default(),
            safeguard_activated: false,
        })
    }

    /// Every coordinate starts with standard deviation `std`.
    pub fn isotropic(mu: DVector<f64>, std: f64, beta: f64) -> Result<Self> {
        let d = mu.len();
        Self::new(mu, DVector::from_element(d, std * std), beta)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn std_devs(&self) -> DVector<f64> {
        self.inv_var.map(|p| 1.0 / p.sqrt())
    }

    pub fn ask<R: Rng + ?Sized>(&self, kind: DirectionKind, n: usize, rng: &mut R) -> Result<AskResult> {
        if n < 2 {
            return Err(Error::BatchTooSmall { size: n });
        }
        let directions = DirectionBatch::draw(kind, n, self.dim(), rng)?;
        Ok(self.candidates_for(directions))
    }

    pub fn candidates_for(&self, directions: DirectionBatch) -> AskResult {
        let std = self.std_devs();
        let mut candidates = directions.z.clone();
        for (j, mut col) in candidates.column_iter_mut().enumerate() {
            col.scale_mut(std[j]);
            col.add_scalar_mut(self.mu[j]);
        }
        AskResult { directions, candidates }
    }

    fn shape(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<ShapedFitness> {
        if z.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: z.dim() });
        }
        if z.len() != fitness.len() {
            return Err(Error::DimMismatch { expected: z.len(), found: fitness.len() });
        }
        shape_fitness(fitness)
    }

    fn unchanged(&self, evaluations: usize) -> Self {
        let mut next = self.clone();
        next.iteration += 1;
        next.evals += evaluations as u64;
        next.safeguard_activated = false;
        next
    }

    /// Fast-INGO: the INGO update with every matrix diagonal.
    pub fn fast_ingo_tell(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<Self> {
        let shaped = self.shape(z, fitness)?;
        if shaped.degenerate {
            return Ok(self.unchanged(fitness.len()));
        }
        let n = z.len() as f64;
        let d = self.dim();
        let mut linear = DVector::<f64>::zeros(d);
        let mut quadratic = DVector::<f64>::zeros(d);
        for (i, &h) in shaped.weights.iter().enumerate() {
            let w = h / n;
            for j in 0..d {
                let zij = z.z[(i, j)];
                linear[j] += w * zij;
                quadratic[j] += w * zij * zij;
            }
        }
        let mut next = self.unchanged(fitness.len());
        let mut inv_var = DVector::from_fn(d, |j, _| self.inv_var[j] + self.beta * quadratic[j] * self.inv_var[j]);
        next.safeguard_activated = self.bounds.clamp_values(&mut inv_var);
        next.mu = DVector::from_fn(d, |j, _| {
            self.mu[j] - self.beta * (1.0 / inv_var[j]) * self.inv_var[j].sqrt() * linear[j]
        });
        next.inv_var = inv_var;
        Ok(next)
    }

    /// Vanilla antithetic ES with fixed variance; `beta` is the learning rate α.
    pub fn es_tell(&self, z: &DirectionBatch, fitness: &[f64]) -> Result<Self> {
        if !is_antithetic(&z.z) {
            return Err(Error::NotAntithetic);
        }
        let shaped = self.shape(z, fitness)?;
        if shaped.degenerate {
            return Ok(self.unchanged(fitness.len()));
        }
        let n = z.len() as f64;
        let std = self.std_devs();
        let mut next = self.unchanged(fitness.len());
        for j in 0..self.dim() {
            let sum: f64 = shaped.weights.iter().enumerate().map(|(i, &h)| h * std[j] * z.z[(i, j)]).sum();
            next.mu[j] = self.mu[j] - self.beta * sum / (n * std[j]);
        }
        Ok(next)
    }
}

fn is_antithetic(z: &DMatrix<f64>) -> bool {
    let n = z.nrows();
    if n == 0 || n % 2 != 0 {
        return false;
    }
    let half = n / 2;
    (0..half).all(|i| z.row(i) == -z.row(half + i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalRule {
    FastIngo,
    Es,
}

#[derive(Clone, Debug)]
pub struct DiagonalOptimizer {
    pub state: DiagonalSearchState,
    pub rule: DiagonalRule,
    pub sampler: DirectionKind,
}

impl DiagonalOptimizer {
    /// ES always samples antithetic pairs; Fast-INGO defaults to i.i.d. directions.
    pub fn new(state: DiagonalSearchState, rule: DiagonalRule) -> Self {
        let sampler = match rule {
            DiagonalRule::FastIngo => DirectionKind::Iid,
            DiagonalRule::Es => DirectionKind::Antithetic,
        };
        Self { state, rule, sampler }
    }

    pub fn with_sampler(mut self, sampler: DirectionKind) -> Self {
        self.sampler = sampler;
        self
    }
}

impl AskTell for DiagonalOptimizer {
    type Batch = AskResult;

    fn ask<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<AskResult> {
        self.state.ask(self.sampler, n, rng)
    }

    fn tell(&mut self, batch: &AskResult, fitness: &[f64]) -> Result<()> {
        self.state = match self.rule {
            DiagonalRule::FastIngo => self.state.fast_ingo_tell(&batch.directions, fitness)?,
            DiagonalRule::Es => self.state.es_tell(&batch.directions, fitness)?,
        };
        Ok(())
    }
}
