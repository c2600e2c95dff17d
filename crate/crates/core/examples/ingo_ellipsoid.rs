//! Full-matrix INGO on the ill-conditioned ellipsoid, driven through ask/tell.
//!
//! ```bash
//! cargo run --release --example ingo_ellipsoid
//! ```

use ingo::harness::default_population_size;
use ingo::{AskTell, Benchmark, GaussianOptimizer, GaussianRule, GaussianSearchState, SpdMatrix};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ingo::Result<()> {
    let d = 10;
    let n = default_population_size(d);
    let f = Benchmark::Ellipsoid;
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let state = GaussianSearchState::new(DVector::from_element(d, 0.5), SpdMatrix::from_diagonal(&vec![0.25; d])?, 1.0 / d as f64)?;
    let mut opt = GaussianOptimizer::new(state, GaussianRule::Ingo);

    let mut best = f64::INFINITY;
    for t in 1..=3000 {
        let batch = opt.ask(n, &mut rng)?;
        let fitness: Vec<f64> = batch.candidates.row_iter().map(|x| f.value(x.transpose().as_slice())).collect();
        best = fitness.iter().copied().fold(best, f64::min);
        opt.tell(&batch, &fitness)?;
        if t % 250 == 0 {
            let (lo, hi) = opt.state.sigma_eigen_range();
            println!("iter {t:5}  evals {:6}  best {best:.3e}  eig(Σ) in [{lo:.1e}, {hi:.1e}]", opt.state.evals);
        }
        if best < 1e-10 {
            break;
        }
    }
    println!("f(μ) = {:.3e}", f.value(opt.state.mu().as_slice()));
    Ok(())
}
