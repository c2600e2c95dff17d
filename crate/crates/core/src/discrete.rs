//! Implicit natural gradient over Bernoulli and categorical distributions,
//! plus a plain genetic algorithm used as a comparison baseline.
//!
//! For an exponential family the natural-parameter step is the negative
//! mean-parameter gradient, so with `p = sigmoid(η)` the Bernoulli update is
//! `η -= β Σ_n (h_n / N) hⁿ` with `hⁿ_i = 1/p_i` when `xⁿ_i = 1` and
//! `-1/(1 - p_i)` otherwise. The categorical case uses `Hⁿ_ij = 1/P_ij` on the
//! observed category.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::estimators::{shape_fitness, ShapedFitness};
use crate::AskTell;

/// Default clamp on natural parameters; `sigmoid(-10) ≈ 4.5e-5`.
pub const DEFAULT_ETA_MAX: f64 = 10.0;

fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

fn check_fitness_rows(rows: usize, fitness: &[f64]) -> Result<ShapedFitness> {
    if rows != fitness.len() {
        return Err(Error::DimMismatch { expected: rows, found: fitness.len() });
    }
    shape_fitness(fitness)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliState {
    pub eta: DVector<f64>,
    pub beta: f64,
    pub eta_max: f64,
    pub iteration: u64,
    pub evals: u64,
}

impl BernoulliState {
    /// Uniform start, `η = 0`.
    pub fn new(dim: usize, beta: f64) -> Self {
        Self::with_eta(DVector::zeros(dim), beta)
    }

    pub fn with_eta(eta: DVector<f64>, beta: f64) -> Self {
        Self { eta, beta, eta_max: DEFAULT_ETA_MAX, iteration: 0, evals: 0 }
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    /// `p_j = P(x_j = 1)`.
    pub fn probabilities(&self) -> DVector<f64> {
        self.eta.map(sigmoid)
    }

    /// `n` i.i.d. binary rows.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<u8> {
        let p = self.probabilities();
        let mut x = DMatrix::zeros(n, self.dim());
        for i in 0..n {
            for j in 0..self.dim() {
                x[(i, j)] = u8::from(rng.random::<f64>() < p[j]);
            }
        }
        x
    }

    pub fn tell(&self, x: &DMatrix<u8>, fitness: &[f64]) -> Result<Self> {
        if x.ncols() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: x.ncols() });
        }
        for row in 0..x.nrows() {
            for col in 0..x.ncols() {
                let value = x[(row, col)];
                if value > 1 {
                    return Err(Error::NonBinaryInput { row, col, value });
                }
            }
        }
        let shaped = check_fitness_rows(x.nrows(), fitness)?;
        let mut next = self.clone();
        next.iteration += 1;
        next.evals += fitness.len() as u64;
        if shaped.degenerate {
            return Ok(next);
        }
        let p = self.probabilities();
        let n = x.nrows() as f64;
        let mut step = DVector::<f64>::zeros(self.dim());
        for (row, &h) in shaped.weights.iter().enumerate() {
            let w = h / n;
            for j in 0..self.dim() {
                step[j] += w * if x[(row, j)] == 1 { 1.0 / p[j] } else { -1.0 / (1.0 - p[j]) };
            }
        }
        next.eta = (&self.eta - step * self.beta).map(|e| e.clamp(-self.eta_max, self.eta_max));
        Ok(next)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoricalState {
    /// `d × K` natural parameters.
    pub eta: DMatrix<f64>,
    pub beta: f64,
    pub eta_max: f64,
    pub iteration: u64,
    pub evals: u64,
}

impl CategoricalState {
    pub fn new(dim: usize, categories: usize, beta: f64) -> Result<Self> {
        if categories < 2 {
            return Err(Error::ConfigInvalid(format!("categorical needs K >= 2, got {categories}")));
        }
        Ok(Self::with_eta(DMatrix::zeros(dim, categories), beta))
    }

    pub fn with_eta(eta: DMatrix<f64>, beta: f64) -> Self {
        Self { eta, beta, eta_max: DEFAULT_ETA_MAX, iteration: 0, evals: 0 }
    }

    pub fn dim(&self) -> usize {
        self.eta.nrows()
    }

    pub fn categories(&self) -> usize {
        self.eta.ncols()
    }

    /// Row-wise softmax `P_ij`.
    pub fn probabilities(&self) -> DMatrix<f64> {
        let mut p = self.eta.clone();
        for mut row in p.row_iter_mut() {
            let max = row.max();
            row.apply(|v| *v = (*v - max).exp());
            let total = row.sum();
            row.unscale_mut(total);
        }
        p
    }

    /// `n` rows of categories in `1..=K`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DMatrix<usize> {
        let p = self.probabilities();
        let k = self.categories();
        let mut x = DMatrix::zeros(n, self.dim());
        for r in 0..n {
            for i in 0..self.dim() {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = k;
                for j in 0..k {
                    acc += p[(i, j)];
                    if u < acc {
                        chosen = j + 1;
                        break;
                    }
                }
                x[(r, i)] = chosen;
            }
        }
        x
    }

    pub fn tell(&self, x: &DMatrix<usize>, fitness: &[f64]) -> Result<Self> {
        if x.ncols() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: x.ncols() });
        }
        let k = self.categories();
        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                let value = x[(r, c)];
                if value < 1 || value > k {
                    return Err(Error::OutOfRangeCategory { row: r, col: c, value, categories: k });
                }
            }
        }
        let shaped = check_fitness_rows(x.nrows(), fitness)?;
        let mut next = self.clone();
        next.iteration += 1;
        next.evals += fitness.len() as u64;
        if shaped.degenerate {
            return Ok(next);
        }
        let p = self.probabilities();
        let n = x.nrows() as f64;
        let mut step = DMatrix::<f64>::zeros(self.dim(), k);
        for (r, &h) in shaped.weights.iter().enumerate() {
            for i in 0..self.dim() {
                let j = x[(r, i)] - 1;
                step[(i, j)] += (h / n) / p[(i, j)];
            }
        }
        next.eta = (&self.eta - step * self.beta).map(|e| e.clamp(-self.eta_max, self.eta_max));
        Ok(next)
    }
}

#[derive(Clone, Debug)]
pub struct BernoulliIngo {
    pub state: BernoulliState,
}

impl AskTell for BernoulliIngo {
    type Batch = DMatrix<u8>;

    fn ask<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DMatrix<u8>> {
        if n < 2 {
            return Err(Error::BatchTooSmall { size: n });
        }
        Ok(self.state.sample(n, rng))
    }

    fn tell(&mut self, batch: &DMatrix<u8>, fitness: &[f64]) -> Result<()> {
        self.state = self.state.tell(batch, fitness)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CategoricalIngo {
    pub state: CategoricalState,
}

impl AskTell for CategoricalIngo {
    type Batch = DMatrix<usize>;

    fn ask<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DMatrix<usize>> {
        if n < 2 {
            return Err(Error::BatchTooSmall { size: n });
        }
        Ok(self.state.sample(n, rng))
    }

    fn tell(&mut self, batch: &DMatrix<usize>, fitness: &[f64]) -> Result<()> {
        self.state = self.state.tell(batch, fitness)?;
        Ok(())
    }
}

/// Operators of the genetic-algorithm baseline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaConfig {
    pub tournament_size: usize,
    /// Per-gene swap probability of uniform crossover.
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1/d`.
    pub mutation_rate: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self { tournament_size: 2, crossover_rate: 0.5, mutation_rate: None }
    }
}

fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f < fitness[best] {
            best = i;
        }
    }
    best
}

fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut winner = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..fitness.len());
        if fitness[challenger] < fitness[winner] {
            winner = challenger;
        }
    }
    winner
}

/// One generation (minimization): the best individual is kept in row 0, the
/// rest are tournament-selected, uniformly crossed over and bit-flip mutated.
pub fn ga_baseline_step<R: Rng + ?Sized>(
    population: &DMatrix<u8>,
    fitness: &[f64],
    config: &GaConfig,
    rng: &mut R,
) -> Result<DMatrix<u8>> {
    let n = population.nrows();
    let d = population.ncols();
    if n < 4 || n % 2 != 0 {
        return Err(Error::BadPopulation(format!("population size must be even and >= 4, got {n}")));
    }
    if fitness.len() != n {
        return Err(Error::DimMismatch { expected: n, found: fitness.len() });
    }
    if let Some(index) = fitness.iter().position(|f| !f.is_finite()) {
        return Err(Error::NonFiniteFitness { index });
    }
    let mutation = config.mutation_rate.unwrap_or(1.0 / d.max(1) as f64);
    let mut next = DMatrix::zeros(n, d);
    next.set_row(0, &population.row(best_index(fitness)));
    let mut slot = 1;
    while slot < n {
        let a = population.row(tournament(fitness, config.tournament_size, rng)).into_owned();
        let b = population.row(tournament(fitness, config.tournament_size, rng)).into_owned();
        let (mut c1, mut c2) = (a.clone(), b.clone());
        for j in 0..d {
            if rng.random::<f64>() < config.crossover_rate {
                c1[j] = b[j];
                c2[j] = a[j];
            }
        }
        for child in [&mut c1, &mut c2] {
            for j in 0..d {
                if rng.random::<f64>() < mutation {
                    child[j] ^= 1;
                }
            }
        }
        for child in [c1, c2] {
            if slot < n {
                next.set_row(slot, &child);
                slot += 1;
            }
        }
    }
    Ok(next)
}

/// Ask/tell wrapper around [`ga_baseline_step`]; owns its population and a
/// private random source for the variation operators.
#[derive(Clone, Debug)]
pub struct GeneticAlgorithm {
    pub population: DMatrix<u8>,
    pub config: GaConfig,
    rng: StdRng,
}

impl GeneticAlgorithm {
    pub fn new<R: Rng + ?Sized>(size: usize, dim: usize, config: GaConfig, rng: &mut R) -> Result<Self> {
        if size < 4 || size % 2 != 0 {
            return Err(Error::BadPopulation(format!("population size must be even and >= 4, got {size}")));
        }
        let population = DMatrix::from_fn(size, dim, |_, _| u8::from(rng.random::<bool>()));
        let rng = StdRng::seed_from_u64(rng.random());
        Ok(Self { population, config, rng })
    }
}

impl AskTell for GeneticAlgorithm {
    type Batch = DMatrix<u8>;

    fn ask<R: Rng + ?Sized>(&self, n: usize, _rng: &mut R) -> Result<DMatrix<u8>> {
        if n != self.population.nrows() {
            return Err(Error::BadPopulation(format!(
                "asked for {n} individuals but the population holds {}",
                self.population.nrows()
            )));
        }
        Ok(self.population.clone())
    }

    fn tell(&mut self, batch: &DMatrix<u8>, fitness: &[f64]) -> Result<()> {
        self.population = ga_baseline_step(batch, fitness, &self.config, &mut self.rng)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn saturated_bernoulli_samples_ones() {
        let state = BernoulliState::with_eta(DVector::from_element(5, DEFAULT_ETA_MAX), 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = state.sample(100, &mut rng);
        assert!(x.iter().all(|&v| v == 1));
    }

    #[test]
    fn uniform_bernoulli_mean_is_half() {
        let state = BernoulliState::new(4, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = state.sample(100_000, &mut rng);
        for j in 0..4 {
            let mean = x.column(j).iter().map(|&v| f64::from(v)).sum::<f64>() / 100_000.0;
            assert!((mean - 0.5).abs() < 0.01 * 0.5, "{mean}");
        }
        let mut again = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(state.sample(100_000, &mut again), x);
    }

    #[test]
    fn bernoulli_hand_example() {
        let state = BernoulliState::new(1, 0.1);
        let x = DMatrix::from_column_slice(2, 1, &[1u8, 0]);
        let next = state.tell(&x, &[1.0, -1.0]).unwrap();
        assert!((next.eta[0] + 0.2).abs() < 1e-15);
        assert!((next.probabilities()[0] - 0.45017).abs() < 1e-5);

        let flipped = state.tell(&x, &[-1.0, 1.0]).unwrap();
        assert_eq!(flipped.eta[0], -next.eta[0]);

        let same = state.tell(&x, &[2.0, 2.0]).unwrap();
        assert_eq!(same.eta, state.eta);
    }

    #[test]
    fn bernoulli_rejects_bad_input() {
        let state = BernoulliState::new(2, 0.1);
        let x = DMatrix::from_row_slice(2, 2, &[0u8, 1, 2, 0]);
        assert!(matches!(state.tell(&x, &[1.0, 2.0]), Err(Error::NonBinaryInput { row: 1, col: 0, value: 2 })));
        let x = DMatrix::from_row_slice(2, 1, &[0u8, 1]);
        assert!(matches!(state.tell(&x, &[1.0, 2.0]), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn bernoulli_clamps_eta() {
        let state = BernoulliState::with_eta(DVector::from_element(1, 9.99), 50.0);
        let x = DMatrix::from_column_slice(2, 1, &[1u8, 0]);
        let next = state.tell(&x, &[-1.0, 1.0]).unwrap();
        assert_eq!(next.eta[0], DEFAULT_ETA_MAX);
    }

    #[test]
    fn categorical_single_entry_moves() {
        let state = CategoricalState::new(1, 3, 0.5).unwrap();
        let x = DMatrix::from_column_slice(2, 1, &[1usize, 2]);
        let next = state.tell(&x, &[1.0, 0.0]).unwrap();
        // sample 1 has weight +1 on category 1, sample 2 weight -1 on category 2
        assert!(next.eta[(0, 0)] < 0.0);
        assert!(next.eta[(0, 1)] > 0.0);
        assert_eq!(next.eta[(0, 2)], 0.0);
        let sums = next.probabilities().column_sum();
        assert!((sums[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn categorical_rejects_out_of_range() {
        let state = CategoricalState::new(1, 3, 0.5).unwrap();
        let x = DMatrix::from_column_slice(2, 1, &[0usize, 2]);
        assert!(matches!(state.tell(&x, &[1.0, 0.0]), Err(Error::OutOfRangeCategory { .. })));
        let x = DMatrix::from_column_slice(2, 1, &[4usize, 2]);
        assert!(matches!(state.tell(&x, &[1.0, 0.0]), Err(Error::OutOfRangeCategory { .. })));
        assert!(CategoricalState::new(2, 1, 0.1).is_err());
    }

    #[test]
    fn categorical_degenerate_unchanged() {
        let state = CategoricalState::new(2, 3, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = state.sample(4, &mut rng);
        assert!(x.iter().all(|&v| (1..=3).contains(&v)));
        assert_eq!(state.tell(&x, &[1.0; 4]).unwrap().eta, state.eta);
    }

    #[test]
    fn ga_without_variation_copies_identical_parents() {
        let pop = DMatrix::from_fn(6, 5, |_, j| u8::from(j % 2 == 0));
        let config = GaConfig { crossover_rate: 0.0, mutation_rate: Some(0.0), ..GaConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let next = ga_baseline_step(&pop, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &config, &mut rng).unwrap();
        assert_eq!(next, pop);
    }

    #[test]
    fn ga_rejects_bad_population() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pop = DMatrix::<u8>::zeros(5, 3);
        assert!(matches!(
            ga_baseline_step(&pop, &[0.0; 5], &GaConfig::default(), &mut rng),
            Err(Error::BadPopulation(_))
        ));
        let pop = DMatrix::<u8>::zeros(2, 3);
        assert!(ga_baseline_step(&pop, &[0.0; 2], &GaConfig::default(), &mut rng).is_err());
    }

    #[test]
    fn ga_elitism_keeps_best() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = |row: &[u8]| row.iter().filter(|&&b| b == 0).count() as f64;
        let mut ga = GeneticAlgorithm::new(8, 16, GaConfig::default(), &mut rng).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..30 {
            let pop = ga.ask(8, &mut rng).unwrap();
            let fitness: Vec<f64> = pop.row_iter().map(|r| f(&r.iter().copied().collect::<Vec<_>>())).collect();
            let gen_best = fitness.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(gen_best <= best);
            best = gen_best;
            ga.tell(&pop, &fitness).unwrap();
        }
    }
}
