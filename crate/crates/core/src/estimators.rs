//! Fitness shaping, direction samplers and the stochastic gradient estimators
//! `(ĝ, Ĝ)` consumed by the Gaussian optimizers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{check_symmetric, clamp_spectrum, spd_inv_sqrt, standard_normal_matrix, symmetrize, GaussianParams, SpdMatrix};

/// Below this batch standard deviation the batch carries no ranking information.
pub const DEGENERATE_STD: f64 = 1e-300;

/// Raw batch fitness together with normalized weights `h_i = (f_i - μ̂) / σ̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapedFitness {
    pub raw: Vec<f64>,
    pub mu_hat: f64,
    /// Population standard deviation (divides by N).
    pub sigma_hat: f64,
    pub weights: Vec<f64>,
    pub degenerate: bool,
}

impl ShapedFitness {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Uses the raw values as weights without centering or scaling.
    pub fn unshaped(raw: &[f64]) -> Self {
        Self {
            raw: raw.to_vec(),
            mu_hat: 0.0,
            sigma_hat: 1.0,
            weights: raw.to_vec(),
            degenerate: false,
        }
    }
}

pub fn shape_fitness(raw: &[f64]) -> Result<ShapedFitness> {
    if raw.len() < 2 {
        return Err(Error::BatchTooSmall { size: raw.len() });
    }
    if let Some(index) = raw.iter().position(|f| !f.is_finite()) {
        return Err(Error::NonFiniteFitness { index });
    }
    let n = raw.len() as f64;
    let mu_hat = raw.iter().sum::<f64>() / n;
    let sigma_hat = (raw.iter().map(|f| (f - mu_hat).powi(2)).sum::<f64>() / n).sqrt();
    let degenerate = sigma_hat < DEGENERATE_STD;
    let weights = if degenerate {
        vec![0.0; raw.len()]
    } else {
        raw.iter().map(|f| (f - mu_hat) / sigma_hat).collect()
    };
    Ok(ShapedFitness { raw: raw.to_vec(), mu_hat, sigma_hat, weights, degenerate })
}

/// Stochastic estimates of `∇_μ J̄` and of the covariance gradient `Ĝ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate {
    pub g_mu: DVector<f64>,
    pub g_sigma: DMatrix<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    #[default]
    Iid,
    Antithetic,
    Orthogonal,
}

impl std::str::FromStr for DirectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Self::Iid),
            "antithetic" => Ok(Self::Antithetic),
            "orthogonal" => Ok(Self::Orthogonal),
            other => Err(Error::ConfigInvalid(format!("unknown sampler `{other}`"))),
        }
    }
}

/// Standard-normal search directions, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionBatch {
    pub z: DMatrix<f64>,
    pub kind: DirectionKind,
}

impl DirectionBatch {
    pub fn new(z: DMatrix<f64>, kind: DirectionKind) -> Self {
        Self { z, kind }
    }

    pub fn len(&self) -> usize {
        self.z.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.z.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn draw<R: Rng + ?Sized>(kind: DirectionKind, n: usize, d: usize, rng: &mut R) -> Result<Self> {
        match kind {
            DirectionKind::Iid => directions_iid(n, d, rng),
            DirectionKind::Antithetic => directions_antithetic(n, d, rng),
            DirectionKind::Orthogonal => directions_orthogonal(n, d, rng),
        }
    }
}

pub fn directions_iid<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<DirectionBatch> {
    if n == 0 {
        return Err(Error::BatchTooSmall { size: n });
    }
    Ok(DirectionBatch::new(standard_normal_matrix(n, d, rng), DirectionKind::Iid))
}

/// Mirrored pairs: row `n/2 + i` is the negation of row `i`.
pub fn directions_antithetic<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<DirectionBatch> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddAntitheticBatch { size: n });
    }
    let half = n / 2;
    let base = standard_normal_matrix(half, d, rng);
    let mut z = DMatrix::zeros(n, d);
    for i in 0..half {
        z.set_row(i, &base.row(i));
        z.set_row(half + i, &(-base.row(i)));
    }
    Ok(DirectionBatch::new(z, DirectionKind::Antithetic))
}

/// Mutually orthogonal rows with `N(0, I)` marginals.
///
/// Rows of a Gaussian matrix are orthonormalized with modified Gram-Schmidt
/// (two passes) and each is then rescaled by an independent chi-distributed
/// length with `d` degrees of freedom.
pub fn directions_orthogonal<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<DirectionBatch> {
    if n == 0 {
        return Err(Error::BatchTooSmall { size: n });
    }
    if n > d {
        return Err(Error::TooManyDirections { requested: n, dim: d });
    }
    let mut z = standard_normal_matrix(n, d, rng);
    for _pass in 0..2 {
        for i in 0..n {
            for k in 0..i {
                let proj = z.row(i).dot(&z.row(k));
                let basis = z.row(k).into_owned();
                let mut row = z.row_mut(i);
                row -= basis * proj;
            }
            let norm = z.row(i).norm();
            z.row_mut(i).unscale_mut(norm);
        }
    }
    let chi2 = ChiSquared::new(d as f64).expect("d >= 1");
    for i in 0..n {
        let length = chi2.sample(rng).sqrt();
        z.row_mut(i).scale_mut(length);
    }
    Ok(DirectionBatch::new(z, DirectionKind::Orthogonal))
}

fn check_batch(inv_sqrt_sigma: &DMatrix<f64>, z: &DirectionBatch, n_weights: usize) -> Result<()> {
    if z.dim() != inv_sqrt_sigma.nrows() {
        return Err(Error::DimMismatch { expected: inv_sqrt_sigma.nrows(), found: z.dim() });
    }
    if z.len() != n_weights {
        return Err(Error::DimMismatch { expected: z.len(), found: n_weights });
    }
    Ok(())
}

/// Batch estimator from shaped weights, given a precomputed `Σ^{-1/2}`.
///
/// `g_mu = Σ_i (h_i/N) Σ^{-1/2} z_i` and
/// `g_sigma = ½ Σ_i (h_i/N) Σ^{-1/2} z_i z_iᵀ Σ^{-1/2}`; the `-Σ⁻¹` part of the
/// score drops out because the shaped weights sum to zero.
pub fn grad_estimates_with_factor(
    inv_sqrt_sigma: &DMatrix<f64>,
    z: &DirectionBatch,
    shaped: &ShapedFitness,
) -> Result<GradientEstimate> {
    check_batch(inv_sqrt_sigma, z, shaped.len())?;
    let d = z.dim();
    let n = z.len() as f64;
    // rows of y are Σ^{-1/2} z_i (the factor is symmetric)
    let y = &z.z * inv_sqrt_sigma;
    let mut g_mu = DVector::zeros(d);
    let mut g_sigma = DMatrix::zeros(d, d);
    for (i, &h) in shaped.weights.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let w = h / n;
        let yi = y.row(i).transpose();
        g_mu.axpy(w, &yi, 1.0);
        g_sigma.ger(0.5 * w, &yi, &yi, 1.0);
    }
    Ok(GradientEstimate { g_mu, g_sigma: symmetrize(g_sigma) })
}

pub fn grad_estimates_batch(state: &GaussianParams, z: &DirectionBatch, shaped: &ShapedFitness) -> Result<GradientEstimate> {
    let factor = spd_inv_sqrt(&state.sigma)?;
    grad_estimates_with_factor(&factor, z, shaped)
}

/// Single-direction estimator `Σ^{-1/2} z (f(μ + Σ^{1/2} z) - f(μ))`.
pub fn grad_mu_single_with_factor(
    inv_sqrt_sigma: &DMatrix<f64>,
    z: &DVector<f64>,
    f_center: f64,
    f_probe: f64,
) -> Result<DVector<f64>> {
    if z.len() != inv_sqrt_sigma.nrows() {
        return Err(Error::DimMismatch { expected: inv_sqrt_sigma.nrows(), found: z.len() });
    }
    Ok(inv_sqrt_sigma * z * (f_probe - f_center))
}

pub fn grad_mu_single(state: &GaussianParams, z: &DVector<f64>, f_center: f64, f_probe: f64) -> Result<DVector<f64>> {
    let factor = spd_inv_sqrt(&state.sigma)?;
    grad_mu_single_with_factor(&factor, z, f_center, f_probe)
}

/// Average of [`grad_mu_single`] over a batch of directions sharing one center value.
pub fn grad_mu_batch_with_factor(
    inv_sqrt_sigma: &DMatrix<f64>,
    z: &DirectionBatch,
    f_center: f64,
    f_probes: &[f64],
) -> Result<DVector<f64>> {
    check_batch(inv_sqrt_sigma, z, f_probes.len())?;
    let n = z.len() as f64;
    let mut acc = DVector::zeros(z.dim());
    for (i, &f) in f_probes.iter().enumerate() {
        acc.axpy((f - f_center) / n, &z.z.row(i).transpose(), 1.0);
    }
    Ok(inv_sqrt_sigma * acc)
}

/// Projects a symmetric matrix onto `b I ⪯ G ⪯ (γ/2) I` by eigenvalue clamping.
pub fn clip_g(g: &DMatrix<f64>, b: f64, gamma_half: f64) -> Result<SpdMatrix> {
    if !(b > 0.0) || !(b <= gamma_half) {
        return Err(Error::BadBounds { lower: b, upper: gamma_half });
    }
    check_symmetric(g)?;
    let (clipped, _) = clamp_spectrum(g, b, gamma_half);
    Ok(SpdMatrix::new_unchecked(clipped))
}
