//! Numerical check that the INGO step is a natural-gradient step in the
//! natural parameters: `F(η)⁻¹ ∇_η J` equals the mean-parameter gradient
//! `∇_m J`, here for `f(x) = x²` in one dimension.

use ingo::gaussian::{fim_natural_gaussian_1d, to_natural};
use ingo::{GaussianParams, SpdMatrix};
use nalgebra::{DVector, Vector2};

fn main() -> ingo::Result<()> {
    let (mu, var) = (1.0, 2.0);
    let p = GaussianParams::new(DVector::from_element(1, mu), SpdMatrix::from_diagonal(&[var])?)?;
    let eta = to_natural(&p)?;
    let fim = fim_natural_gaussian_1d(&eta)?;

    // J = E[x²] = m2, so ∇_m J = (0, 1); by the chain rule ∇_η J = F ∇_m J.
    let grad_m = Vector2::new(0.0, 1.0);
    let grad_eta = fim * grad_m;
    let natural = fim.try_inverse().expect("Fisher matrix is invertible") * grad_eta;

    // ∇_η J by central differences of J(η) = μ² + σ².
    let j = |e1: f64, e2: f64| {
        let v = -0.5 / e2;
        (v * e1).powi(2) + v
    };
    let (e1, e2, h) = (eta.eta1[0], eta.eta2[(0, 0)], 1e-6);
    let fd = Vector2::new((j(e1 + h, e2) - j(e1 - h, e2)) / (2.0 * h), (j(e1, e2 + h) - j(e1, e2 - h)) / (2.0 * h));

    println!("η = ({e1}, {e2})");
    println!("F(η) =\n{fim}");
    println!("∇_η J analytic {:?}  finite-difference {:?}", grad_eta.as_slice(), fd.as_slice());
    println!("F⁻¹ ∇_η J = {:?}  (∇_m J = {:?})", natural.as_slice(), grad_m.as_slice());
    Ok(())
}
