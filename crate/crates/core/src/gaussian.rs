//! Dense symmetric positive-definite matrix utilities and Gaussian parameter
//! maps.
//!
//! Every factorization in the crate goes through a single symmetric
//! eigendecomposition: square roots, inverse square roots, inverses and the
//! eigenvalue safeguard are all `V diag(g(λ)) Vᵀ` for some scalar map `g`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative eigenvalue floor: `floor = 1e-12 * max(λ_max, 1)`.
pub const DEFAULT_RELATIVE_FLOOR: f64 = 1e-12;
/// Absolute eigenvalue ceiling used by the safeguard.
pub const DEFAULT_CEIL: f64 = 1e300;
/// Negative eigenvalues down to `-SQRT_NEGATIVE_TOL` are treated as zero by [`spd_sqrt`].
pub const SQRT_NEGATIVE_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;

/// Floor applied to the spectrum of a matrix whose largest eigenvalue is `max_eigenvalue`.
pub fn default_floor(max_eigenvalue: f64) -> f64 {
    DEFAULT_RELATIVE_FLOOR * max_eigenvalue.max(1.0)
}

/// A dense symmetric positive (semi-)definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    /// Validates symmetry and strict positive definiteness.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix)?;
        let eig = eigh(&matrix);
        let min = eig.eigenvalues.min();
        if !(min > 0.0) {
            return Err(Error::SingularInput { min_eigenvalue: min });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if let Some(&bad) = diag.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::SingularInput { min_eigenvalue: bad });
        }
        Ok(Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag))))
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<f64>) -> Self {
        Self(matrix)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

impl Deref for SpdMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Mean and covariance of a multivariate Gaussian.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianParams {
    pub mu: DVector<f64>,
    pub sigma: SpdMatrix,
}

impl GaussianParams {
    pub fn new(mu: DVector<f64>, sigma: SpdMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::DimMismatch { expected: sigma.dim(), found: mu.len() });
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { mu, sigma })
    }

    pub fn standard(dim: usize) -> Self {
        Self { mu: DVector::zeros(dim), sigma: SpdMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Natural parameters `η1 = Σ⁻¹μ`, `η2 = -½Σ⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalParams {
    pub eta1: DVector<f64>,
    pub eta2: DMatrix<f64>,
}

/// Mean parameters `m1 = E[x] = μ`, `m2 = E[xxᵀ] = μμᵀ + Σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanParams {
    pub m1: DVector<f64>,
    pub m2: DMatrix<f64>,
}

/// Result of [`pd_safeguard`]; `clamped` reports whether any eigenvalue moved.
#[derive(Clone, Debug)]
pub struct Safeguarded {
    pub matrix: SpdMatrix,
    pub clamped: bool,
}

pub(crate) fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Ok(())
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    check_square(m)?;
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                return Err(Error::NonSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub(crate) fn eigh(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(m.clone())
}

/// `V diag(map(λ)) Vᵀ`, symmetrized to remove rounding asymmetry.
pub(crate) fn spectral_map(
    eig: &SymmetricEigen<f64, nalgebra::Dyn>,
    map: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let mut scaled = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = map(lambda);
        scaled.column_mut(j).scale_mut(s);
    }
    let out = scaled * eig.eigenvectors.transpose();
    symmetrize(out)
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Clamps the spectrum of a symmetric matrix into `[lower, upper]`.
/// Returns the input unchanged when nothing needs clamping.
pub(crate) fn clamp_spectrum(m: &DMatrix<f64>, lower: f64, upper: f64) -> (DMatrix<f64>, bool) {
    let eig = eigh(m);
    let clamped = eig.eigenvalues.iter().any(|&l| l < lower || l > upper);
    if !clamped {
        return (m.clone(), false);
    }
    (spectral_map(&eig, |l| l.clamp(lower, upper)), true)
}

/// Symmetric square root via eigendecomposition.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<SpdMatrix> {
    check_symmetric(m)?;
    let eig = eigh(m);
    let min = eig.eigenvalues.min();
    if min < -SQRT_NEGATIVE_TOL {
        return Err(Error::IndefiniteInput { min_eigenvalue: min });
    }
    Ok(SpdMatrix::new_unchecked(spectral_map(&eig, |l| l.max(0.0).sqrt())))
}

fn positive_spectrum(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_symmetric(m)?;
    let eig = eigh(m);
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if !(min >= default_floor(max)) {
        return Err(Error::SingularInput { min_eigenvalue: min });
    }
    Ok(eig)
}

/// Symmetric inverse square root `M^{-1/2}`.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> Result<SpdMatrix> {
    let eig = positive_spectrum(m)?;
    Ok(SpdMatrix::new_unchecked(spectral_map(&eig, |l| 1.0 / l.sqrt())))
}

pub fn spd_inverse(m: &DMatrix<f64>) -> Result<SpdMatrix> {
    let eig = positive_spectrum(m)?;
    Ok(SpdMatrix::new_unchecked(spectral_map(&eig, |l| 1.0 / l)))
}

/// Clamps eigenvalues of a symmetric matrix into `[floor, ceil]`.
pub fn pd_safeguard(m: &DMatrix<f64>, floor: f64, ceil: f64) -> Result<Safeguarded> {
    if !(floor > 0.0) || !(floor < ceil) {
        return Err(Error::BadBounds { lower: floor, upper: ceil });
    }
    check_symmetric(m)?;
    let (matrix, clamped) = clamp_spectrum(m, floor, ceil);
    Ok(Safeguarded { matrix: SpdMatrix::new_unchecked(matrix), clamped })
}

/// [`pd_safeguard`] with the default relative floor and absolute ceiling.
pub fn pd_safeguard_default(m: &DMatrix<f64>) -> Result<Safeguarded> {
    check_symmetric(m)?;
    let max = eigh(m).eigenvalues.max();
    pd_safeguard(m, default_floor(max), DEFAULT_CEIL)
}

pub fn to_natural(p: &GaussianParams) -> Result<NaturalParams> {
    let precision = spd_inverse(&p.sigma)?.into_inner();
    Ok(NaturalParams { eta1: &precision * &p.mu, eta2: precision * -0.5 })
}

pub fn from_natural(n: &NaturalParams) -> Result<GaussianParams> {
    check_symmetric(&n.eta2)?;
    if n.eta1.len() != n.eta2.nrows() {
        return Err(Error::DimMismatch { expected: n.eta2.nrows(), found: n.eta1.len() });
    }
    let precision = &n.eta2 * -2.0;
    let sigma = spd_inverse(&precision)?;
    let mu = sigma.as_matrix() * &n.eta1;
    GaussianParams::new(mu, sigma)
}

pub fn to_mean(p: &GaussianParams) -> MeanParams {
    let m2 = &p.mu * p.mu.transpose() + p.sigma.as_matrix();
    MeanParams { m1: p.mu.clone(), m2: symmetrize(m2) }
}

pub fn from_mean(m: &MeanParams) -> Result<GaussianParams> {
    check_symmetric(&m.m2)?;
    if m.m1.len() != m.m2.nrows() {
        return Err(Error::DimMismatch { expected: m.m2.nrows(), found: m.m1.len() });
    }
    let sigma = symmetrize(&m.m2 - &m.m1 * m.m1.transpose());
    GaussianParams::new(m.m1.clone(), SpdMatrix::new(sigma)?)
}

/// Raw standard-normal directions and the matching candidates, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSample {
    pub z: DMatrix<f64>,
    pub x: DMatrix<f64>,
}

pub(crate) fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            z[(i, j)] = rng.sample(StandardNormal);
        }
    }
    z
}

/// `x_i = μ + S z_i` for every row `z_i` of `z`.
pub(crate) fn affine_rows(mu: &DVector<f64>, sqrt_sigma: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = z * sqrt_sigma.transpose();
    for mut row in x.row_iter_mut() {
        row += mu.transpose();
    }
    x
}

/// Draws `n` samples `x_i = μ + Σ^{1/2} z_i`, `z_i ~ N(0, I)`.
pub fn sample_gaussian<R: Rng + ?Sized>(p: &GaussianParams, n: usize, rng: &mut R) -> Result<GaussianSample> {
    if n == 0 {
        return Err(Error::BatchTooSmall { size: 0 });
    }
    let sqrt = spd_sqrt(&p.sigma)?;
    let z = standard_normal_matrix(n, p.dim(), rng);
    let x = affine_rows(&p.mu, &sqrt, &z);
    Ok(GaussianSample { z, x })
}

/// `KL(p ‖ q)` between two Gaussians in closed form.
pub fn kl_gaussian(p: &GaussianParams, q: &GaussianParams) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimMismatch { expected: q.dim(), found: p.dim() });
    }
    let eig_q = positive_spectrum(&q.sigma)?;
    let eig_p = positive_spectrum(&p.sigma)?;
    let q_inv = spectral_map(&eig_q, |l| 1.0 / l);
    let diff = &p.mu - &q.mu;
    let mahalanobis = (diff.transpose() * &q_inv * &diff)[(0, 0)];
    let trace = (&q_inv * p.sigma.as_matrix()).trace();
    let logdet_q: f64 = eig_q.eigenvalues.iter().map(|l| l.ln()).sum();
    let logdet_p: f64 = eig_p.eigenvalues.iter().map(|l| l.ln()).sum();
    Ok(0.5 * (mahalanobis + trace + logdet_q - logdet_p - p.dim() as f64))
}

/// Fisher information of a 1-D Gaussian in natural coordinates `(η1, η2)`.
///
/// This is the covariance of the sufficient statistic `(x, x²)`:
/// `[[σ², 2μσ²], [2μσ², 4μ²σ² + 2σ⁴]]`.
pub fn fim_natural_gaussian_1d(n: &NaturalParams) -> Result<Matrix2<f64>> {
    if n.eta1.len() != 1 || n.eta2.nrows() != 1 || n.eta2.ncols() != 1 {
        return Err(Error::DimMismatch { expected: 1, found: n.eta1.len() });
    }
    let eta2 = n.eta2[(0, 0)];
    if !(eta2 < 0.0) {
        return Err(Error::SingularInput { min_eigenvalue: -2.0 * eta2 });
    }
    let var = -0.5 / eta2;
    let mu = var * n.eta1[0];
    let cross = 2.0 * mu * var;
    Ok(Matrix2::new(var, cross, cross, 4.0 * mu * mu * var + 2.0 * var * var))
}
