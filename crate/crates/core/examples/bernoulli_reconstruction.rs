//! Discrete INGO with a Bernoulli search distribution on binary reconstruction,
//! next to the genetic-algorithm baseline on the same target.

use ingo::benchmarks::reconstruction_target;
use ingo::harness::discrete_population_size;
use ingo::{eval_binary_reconstruction, AskTell, BernoulliIngo, BernoulliState, GaConfig, GeneticAlgorithm};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn batch_fitness(x: &DMatrix<u8>, w: &[f64]) -> ingo::Result<Vec<f64>> {
    x.row_iter().map(|r| eval_binary_reconstruction(&r.iter().copied().collect::<Vec<_>>(), w)).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> ingo::Result<()> {
    let d = 100;
    let n = discrete_population_size(d);
    let w = reconstruction_target(d, 42);
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    let mut ingo = BernoulliIngo { state: BernoulliState::new(d, 1.0 / d as f64) };
    let mut ga = GeneticAlgorithm::new(n, d, GaConfig::default(), &mut rng)?;

    for generation in 1..=2000 {
        let x = ingo.ask(n, &mut rng)?;
        let fi = batch_fitness(&x, &w)?;
        ingo.tell(&x, &fi)?;
        let y = ga.ask(n, &mut rng)?;
        let fg = batch_fitness(&y, &w)?;
        ga.tell(&y, &fg)?;
        if generation % 200 == 0 {
            println!("gen {generation:5}  population regret: ingo {:8.3}  ga {:8.3}", mean(&fi), mean(&fg));
        }
    }
    let p = ingo.state.probabilities();
    let agree = p.iter().zip(&w).filter(|(p, w)| (**p > 0.5) == (**w > 0.0)).count();
    println!("most likely bit matches sign(w) on {agree}/{d} coordinates");
    Ok(())
}
