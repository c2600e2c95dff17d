//! Diagonal Fast-INGO on separable problems, where it needs only O(d) work per sample.

use ingo::harness::default_population_size;
use ingo::{AskTell, Benchmark, DiagonalOptimizer, DiagonalRule, DiagonalSearchState};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ingo::Result<()> {
    let d = 50;
    let n = default_population_size(d);
    for f in [Benchmark::Ellipsoid, Benchmark::L1Ellipsoid, Benchmark::Discus] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let state = DiagonalSearchState::isotropic(DVector::from_element(d, 0.5), 0.5, 1.0 / (d as f64).sqrt())?;
        let mut opt = DiagonalOptimizer::new(state, DiagonalRule::FastIngo);
        let mut best = f64::INFINITY;
        while opt.state.evals < 200_000 && best > 1e-8 {
            let batch = opt.ask(n, &mut rng)?;
            let fitness: Vec<f64> = batch.candidates.row_iter().map(|x| f.value(x.transpose().as_slice())).collect();
            best = fitness.iter().copied().fold(best, f64::min);
            opt.tell(&batch, &fitness)?;
        }
        let sd = opt.state.std_devs();
        println!("{f:16} best {best:.2e} after {:6} evals, σ in [{:.1e}, {:.1e}]", opt.state.evals, sd.min(), sd.max());
    }
    Ok(())
}
