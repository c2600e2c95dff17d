//! Synthetic objectives: the ill-conditioned ellipsoid family, Discus, Levy,
//! Rastrigin10, the binary reconstruction problem, and analytic sphere moments
//! used as estimator oracles.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Sphere,
    Ellipsoid,
    L1Ellipsoid,
    LHalfEllipsoid,
    Discus,
    Levy,
    Rastrigin10,
}

impl Benchmark {
    pub const ALL: [Benchmark; 7] = [
        Benchmark::Sphere,
        Benchmark::Ellipsoid,
        Benchmark::L1Ellipsoid,
        Benchmark::LHalfEllipsoid,
        Benchmark::Discus,
        Benchmark::Levy,
        Benchmark::Rastrigin10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Sphere => "sphere",
            Benchmark::Ellipsoid => "ellipsoid",
            Benchmark::L1Ellipsoid => "l1_ellipsoid",
            Benchmark::LHalfEllipsoid => "lhalf_ellipsoid",
            Benchmark::Discus => "discus",
            Benchmark::Levy => "levy",
            Benchmark::Rastrigin10 => "rastrigin10",
        }
    }

    /// The scaled family uses `10^{k(i-1)/(d-1)}` and needs `d >= 2`.
    pub fn min_dim(self) -> usize {
        match self {
            Benchmark::Ellipsoid | Benchmark::L1Ellipsoid | Benchmark::LHalfEllipsoid | Benchmark::Rastrigin10 => 2,
            _ => 1,
        }
    }

    pub fn check_dim(self, dim: usize) -> Result<()> {
        if dim < self.min_dim() {
            return Err(Error::DimTooSmall { name: self.name(), min: self.min_dim(), dim });
        }
        Ok(())
    }

    /// Global minimizer; all functions have optimum value 0.
    pub fn minimizer(self, dim: usize) -> Vec<f64> {
        match self {
            Benchmark::Levy => vec![1.0; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn known_optimum(self) -> f64 {
        0.0
    }

    pub fn eval(self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.value(x))
    }

    /// Evaluates without the dimension check; callers validate `x.len()` once up front.
    pub fn value(self, x: &[f64]) -> f64 {
        let d = x.len();
        match self {
            Benchmark::Sphere => x.iter().map(|v| v * v).sum(),
            Benchmark::Ellipsoid => scaled_sum(x, 6.0, |v| v * v),
            Benchmark::L1Ellipsoid => scaled_sum(x, 6.0, f64::abs),
            Benchmark::LHalfEllipsoid => scaled_sum(x, 6.0, |v| v.abs().sqrt()),
            Benchmark::Discus => 1e6 * x[0] * x[0] + x[1..].iter().map(|v| v * v).sum::<f64>(),
            Benchmark::Levy => levy(x),
            Benchmark::Rastrigin10 => {
                let tau = 2.0 * std::f64::consts::PI;
                let body: f64 = (0..d)
                    .map(|i| {
                        let y = scale(i, d, 1.0) * x[i];
                        y * y - 10.0 * (tau * y).cos()
                    })
                    .sum();
                10.0 * d as f64 + body
            }
        }
    }
}

/// `10^{exponent (i-1)/(d-1)}` for zero-based index `i`.
fn scale(i: usize, d: usize, exponent: f64) -> f64 {
    10f64.powf(exponent * i as f64 / (d - 1) as f64)
}

fn scaled_sum(x: &[f64], exponent: f64, term: impl Fn(f64) -> f64) -> f64 {
    let d = x.len();
    x.iter().enumerate().map(|(i, &v)| scale(i, d, exponent) * term(v)).sum()
}

fn levy(x: &[f64]) -> f64 {
    use std::f64::consts::PI;
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let d = w.len();
    let head = (PI * w[0]).sin().powi(2);
    let body: f64 = w[..d - 1]
        .iter()
        .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
        .sum();
    let last = w[d - 1];
    let tail = (last - 1.0).powi(2) * (1.0 + (2.0 * PI * last).sin().powi(2));
    head + body + tail
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownFunction(s.to_string()))
    }
}

/// Evaluates a continuous benchmark addressed by name.
pub fn eval_benchmark(name: &str, x: &[f64]) -> Result<f64> {
    name.parse::<Benchmark>()?.eval(x)
}

/// `‖sign(x - ½) - w‖² - ‖sign(w) - w‖²`, accumulated per coordinate so that
/// matched coordinates contribute exactly zero.
pub fn eval_binary_reconstruction(x: &[u8], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::DimMismatch { expected: w.len(), found: x.len() });
    }
    if let Some(index) = w.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroTargetEntry { index });
    }
    Ok(reconstruction_value(x, w))
}

pub(crate) fn reconstruction_value(x: &[u8], w: &[f64]) -> f64 {
    x.iter()
        .zip(w)
        .map(|(&bit, &wj)| {
            let s = if bit == 1 { 1.0 } else { -1.0 };
            (s - wj).powi(2) - (wj.signum() - wj).powi(2)
        })
        .sum()
}

/// Reconstruction target with standard-normal entries.
pub fn reconstruction_target(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| loop {
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                break v;
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveKind {
    Continuous(Benchmark),
    BinaryReconstruction { target: Vec<f64> },
}

/// Objective resolved from a name and dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveSpec {
    pub name: String,
    pub dim: usize,
    pub kind: ObjectiveKind,
    pub known_optimum: Option<f64>,
}

pub const RECONSTRUCTION: &str = "binary_reconstruction";

impl ObjectiveSpec {
    /// `target_seed` only matters for the reconstruction problem.
    pub fn resolve(name: &str, dim: usize, target_seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ConfigInvalid("dimension must be positive".into()));
        }
        let kind = if name == RECONSTRUCTION {
            ObjectiveKind::BinaryReconstruction { target: reconstruction_target(dim, target_seed) }
        } else {
            let b: Benchmark = name.parse()?;
            b.check_dim(dim)?;
            ObjectiveKind::Continuous(b)
        };
        Ok(Self { name: name.to_string(), dim, kind, known_optimum: Some(0.0) })
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.kind, ObjectiveKind::BinaryReconstruction { .. })
    }
}

/// `E[f]`, `∇_μ E[f]`, `∇_Σ E[f]` for `f(x) = ‖x‖²` under `N(μ, Σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereMoments {
    pub expectation: f64,
    pub grad_mu: DVector<f64>,
    pub grad_sigma: DMatrix<f64>,
}

pub fn sphere_moments(p: &GaussianParams) -> SphereMoments {
    let d = p.dim();
    SphereMoments {
        expectation: p.mu.norm_squared() + p.sigma.trace(),
        grad_mu: &p.mu * 2.0,
        grad_sigma: DMatrix::identity(d, d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SpdMatrix;

    #[test]
    fn ellipsoid_values() {
        for d in [2, 5, 30] {
            assert_eq!(eval_benchmark("ellipsoid", &vec![0.0; d]).unwrap(), 0.0);
        }
        assert!((eval_benchmark("ellipsoid", &[1.0, 1.0]).unwrap() - (1.0 + 1e6)).abs() < 1e-6);
        assert!((eval_benchmark("lhalf_ellipsoid", &[4.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((eval_benchmark("l1_ellipsoid", &[-1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minima_are_zero() {
        for b in Benchmark::ALL {
            for d in [2, 7] {
                let v = b.eval(&b.minimizer(d)).unwrap();
                assert!(v.abs() <= 1e-12, "{b} at d={d}: {v}");
            }
        }
    }

    #[test]
    fn discus_is_squared() {
        assert_eq!(Benchmark::Discus.eval(&[-1.0, 2.0]).unwrap(), 1e6 + 4.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(eval_benchmark("rosenbrock", &[0.0, 0.0]), Err(Error::UnknownFunction(_))));
        assert!(matches!(eval_benchmark("ellipsoid", &[0.0]), Err(Error::DimTooSmall { .. })));
        assert!(eval_benchmark("levy", &[1.0]).is_ok());
    }

    #[test]
    fn reconstruction_values() {
        let w = [0.3, -1.2, 2.0];
        assert_eq!(eval_binary_reconstruction(&[1, 0, 1], &w).unwrap(), 0.0);
        assert_eq!(eval_binary_reconstruction(&[0], &[2.0]).unwrap(), 8.0);
        let base = eval_binary_reconstruction(&[1, 0, 1], &w).unwrap();
        for j in 0..3 {
            let mut x = [1u8, 0, 1];
            x[j] ^= 1;
            assert!(eval_binary_reconstruction(&x, &w).unwrap() > base);
        }
        assert!(matches!(eval_binary_reconstruction(&[1], &[0.0]), Err(Error::ZeroTargetEntry { index: 0 })));
        assert!(matches!(eval_binary_reconstruction(&[1, 0], &[1.0]), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn sphere_moment_values() {
        let m = sphere_moments(&GaussianParams::standard(3));
        assert_eq!(m.expectation, 3.0);
        assert_eq!(m.grad_mu, DVector::zeros(3));
        assert_eq!(m.grad_sigma, DMatrix::identity(3, 3));

        let p = GaussianParams::new(DVector::from_vec(vec![1.0, 0.0]), SpdMatrix::from_diagonal(&[2.0, 1.0]).unwrap())
            .unwrap();
        let m = sphere_moments(&p);
        assert_eq!(m.expectation, 4.0);
        assert_eq!(m.grad_mu, DVector::from_vec(vec![2.0, 0.0]));
    }

    #[test]
    fn sphere_gradient_matches_finite_differences() {
        let mu = DVector::from_vec(vec![0.7, -1.3, 0.2]);
        let sigma = SpdMatrix::from_diagonal(&[0.5, 1.0, 2.0]).unwrap();
        let p = GaussianParams::new(mu.clone(), sigma.clone()).unwrap();
        let analytic = sphere_moments(&p).grad_mu;
        let h = 1e-5;
        for j in 0..3 {
            let mut plus = mu.clone();
            let mut minus = mu.clone();
            plus[j] += h;
            minus[j] -= h;
            let ep = sphere_moments(&GaussianParams::new(plus, sigma.clone()).unwrap()).expectation;
            let em = sphere_moments(&GaussianParams::new(minus, sigma.clone()).unwrap()).expectation;
            assert!(((ep - em) / (2.0 * h) - analytic[j]).abs() < 1e-6);
        }
    }

    #[test]
    fn ellipsoid_is_even() {
        let x = [0.3, -2.0, 1.7, 4.1];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(Benchmark::Ellipsoid.value(&x), Benchmark::Ellipsoid.value(&neg));
    }

    #[test]
    fn objective_spec_resolution() {
        let spec = ObjectiveSpec::resolve(RECONSTRUCTION, 10, 3).unwrap();
        assert!(spec.is_binary());
        assert_eq!(spec, ObjectiveSpec::resolve(RECONSTRUCTION, 10, 3).unwrap());
        assert!(ObjectiveSpec::resolve("ellipsoid", 1, 0).is_err());
    }
}
