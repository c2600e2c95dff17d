//! The general framework step with a clipped curvature estimate, fed by
//! orthogonal direction batches. The covariance shrinks at least as fast as
//! `1 / (2 t β b)` once `Ĝ ⪰ b I`.

use ingo::{AskTell, Benchmark, ClipBounds, DirectionKind, GaussianOptimizer, GaussianRule, GaussianSearchState, SpdMatrix};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ingo::Result<()> {
    let d = 6;
    let beta = 0.1;
    let clip = ClipBounds { b: 0.05, gamma_half: 5.0 };
    let f = Benchmark::Sphere;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let state = GaussianSearchState::new(DVector::from_element(d, 1.0), SpdMatrix::identity(d), beta)?;
    let mut opt = GaussianOptimizer::new(state, GaussianRule::Framework { clip: Some(clip) }).with_sampler(DirectionKind::Orthogonal);

    for t in 1..=400u32 {
        let batch = opt.ask(d, &mut rng)?;
        let fitness: Vec<f64> = batch.candidates.row_iter().map(|x| f.value(x.transpose().as_slice())).collect();
        opt.tell(&batch, &fitness)?;
        if t % 50 == 0 {
            let largest = opt.state.sigma_eigen_range().1;
            let bound = 1.0 / (2.0 * t as f64 * beta * clip.b);
            println!("t {t:4}  f(μ) {:.3e}  ‖Σ‖ {largest:.3e}  bound {bound:.3e}", f.value(opt.state.mu().as_slice()));
        }
    }
    Ok(())
}
