//! INGO and INGOstep share the precision update and differ only in how the
//! mean moves. Both see the same directions and fitness every iteration here.

use ingo::{Benchmark, DirectionBatch, DirectionKind, GaussianSearchState, SpdMatrix};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> ingo::Result<()> {
    let d = 8;
    let n = 12;
    let f = Benchmark::Levy;
    let start = GaussianSearchState::new(DVector::from_element(d, 0.3), SpdMatrix::from_diagonal(&vec![0.25; d])?, 1.0 / d as f64)?;

    for (name, step) in [
        ("ingo", GaussianSearchState::ingo_tell as fn(&GaussianSearchState, &DirectionBatch, &[f64]) -> ingo::Result<GaussianSearchState>),
        ("ingostep", GaussianSearchState::ingostep_tell),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut state = start.clone();
        for _ in 0..1500 {
            let z = DirectionBatch::draw(DirectionKind::Iid, n, d, &mut rng)?;
            let batch = state.candidates_for(z);
            let fitness: Vec<f64> = batch.candidates.row_iter().map(|x| f.value(x.transpose().as_slice())).collect();
            state = step(&state, &batch.directions, &fitness)?;
        }
        println!("{name:9} f(μ) = {:.3e}  μ[0] = {:.6}", f.value(state.mu().as_slice()), state.mu()[0]);
    }
    Ok(())
}
