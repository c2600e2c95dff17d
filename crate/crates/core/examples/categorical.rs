//! Categorical INGO: each coordinate picks one of K labels, and the objective
//! counts how far each pick is from a hidden label.

use ingo::{AskTell, CategoricalIngo, CategoricalState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ingo::Result<()> {
    let d = 30;
    let k = 5;
    let n = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hidden: Vec<usize> = (0..d).map(|_| rng.random_range(1..=k)).collect();
    let cost = |row: &[usize]| row.iter().zip(&hidden).map(|(a, b)| a.abs_diff(*b) as f64).sum::<f64>();

    let mut opt = CategoricalIngo { state: CategoricalState::new(d, k, 0.1)? };
    for t in 1..=400 {
        let x = opt.ask(n, &mut rng)?;
        let fitness: Vec<f64> = x.row_iter().map(|r| cost(&r.iter().copied().collect::<Vec<_>>())).collect();
        opt.tell(&x, &fitness)?;
        if t % 50 == 0 {
            println!("iter {t:4}  mean cost {:.2}", fitness.iter().sum::<f64>() / n as f64);
        }
    }
    let p = opt.state.probabilities();
    let solved = (0..d).filter(|&i| p.row(i).transpose().argmax().0 + 1 == hidden[i]).count();
    println!("mode matches the hidden label on {solved}/{d} coordinates");
    Ok(())
}
