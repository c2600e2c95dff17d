//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ingo::estimators::{grad_mu_batch_with_factor, grad_mu_single};
use ingo::gaussian::{fim_natural_gaussian_1d, kl_gaussian, to_natural};
use ingo::harness::{
    discrete_population_size, median, run_experiment, write_trace_to, Algorithm, RunConfig, Setting,
};
use ingo::*;
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn gaussian_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn random_spd(rng: &mut ChaCha8Rng, d: usize, shift: f64) -> DMatrix<f64> {
    let a = gaussian_mat(rng, d, d);
    let m = &a * a.transpose() / d as f64 + DMatrix::identity(d, d) * shift;
    (&m + m.transpose()) * 0.5
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Shaped weights `(f - mean) / std` with the population standard deviation.
fn oracle_weights(f: &[f64]) -> Vec<f64> {
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let std = (f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    f.iter().map(|v| (v - mean) / std).collect()
}

fn sphere(x: &DVector<f64>) -> f64 {
    x.norm_squared()
}

fn estimator_unbiasedness() -> Outcome {
    let mu = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let params = GaussianParams::new(mu.clone(), SpdMatrix::identity(3)).unwrap();
    let f_center = sphere(&mu);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 1_000_000;
    let mut sum = DVector::zeros(3);
    for _ in 0..draws {
        let z = gaussian_vec(&mut rng, 3);
        let x = &mu + &z;
        sum += grad_mu_single(&params, &z, f_center, sphere(&x)).unwrap();
    }
    let mean = sum / draws as f64;
    let expected = DVector::from_vec(vec![2.0, 0.0, 0.0]);
    let rel = (&mean - &expected).norm() / expected.norm();
    outcome(rel <= 0.02, format!("mean [{:.4}, {:.4}, {:.4}], relative error {rel:.2e}", mean[0], mean[1], mean[2]))
}

/// Hessian of the log-partition `A(η) = -η₁²/(4η₂) - ½ log(-2η₂)`.
fn oracle_fim(eta1: f64, eta2: f64) -> Matrix2<f64> {
    let a11 = -1.0 / (2.0 * eta2);
    let a12 = eta1 / (2.0 * eta2 * eta2);
    let a22 = -eta1 * eta1 / (2.0 * eta2.powi(3)) + 1.0 / (2.0 * eta2 * eta2);
    Matrix2::new(a11, a12, a12, a22)
}

fn natural_gradient_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    let mut fim_worst: f64 = 0.0;
    for _ in 0..100 {
        let a = rng.random_range(0.1..2.0);
        let b = rng.random_range(-2.0..2.0);
        let mu = rng.random_range(-2.0..2.0);
        let var = rng.random_range(0.2..3.0);
        let beta = rng.random_range(0.01..0.2);

        // Library: framework step with exact gradients of J(μ, σ²) = a(μ² + σ²) + bμ.
        let state =
            GaussianSearchState::new(DVector::from_element(1, mu), SpdMatrix::from_diagonal(&[var]).unwrap(), beta)
                .unwrap();
        let g_mu = DVector::from_element(1, 2.0 * a * mu + b);
        let g_sigma = DMatrix::from_element(1, 1, a);
        let next = state.framework_step(&g_mu, &g_sigma).unwrap();
        let lib = to_natural(&next.params).unwrap();
        let lib = Vector2::new(lib.eta1[0], lib.eta2[(0, 0)]);

        // Oracle: natural-gradient step η - β F⁻¹ ∇_η J in natural coordinates.
        let eta1 = mu / var;
        let eta2 = -1.0 / (2.0 * var);
        let dj_dmu = 2.0 * a * mu + b;
        let grad_eta = Vector2::new(
            dj_dmu * (-1.0 / (2.0 * eta2)),
            dj_dmu * eta1 / (2.0 * eta2 * eta2) + a / (2.0 * eta2 * eta2),
        );
        let fim = oracle_fim(eta1, eta2);
        let step = fim.lu().solve(&grad_eta).unwrap();
        let oracle = Vector2::new(eta1, eta2) - step * beta;

        for k in 0..2 {
            worst = worst.max((lib[k] - oracle[k]).abs() / oracle[k].abs().max(1.0));
        }
        let natural = to_natural(&state.params).unwrap();
        let lib_fim = fim_natural_gaussian_1d(&natural).unwrap();
        fim_worst = fim_worst.max((lib_fim - fim).abs().max() / fim.abs().max().max(1.0));
    }
    outcome(
        worst <= 1e-8 && fim_worst <= 1e-8,
        format!("max update discrepancy {worst:.2e}, max FIM discrepancy {fim_worst:.2e}"),
    )
}

fn trust_region_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut violations = 0usize;
    let mut min_gap = f64::INFINITY;
    for instance in 0..50 {
        let d = 1 + instance % 3;
        let mu_t = gaussian_vec(&mut rng, d);
        let sigma_t = random_spd(&mut rng, d, 0.5);
        let beta = rng.random_range(0.05..0.5);
        let g_hat = gaussian_vec(&mut rng, d);
        let g_sigma = random_spd(&mut rng, d, 0.1) * 0.5;
        let state = GaussianSearchState::new(mu_t.clone(), SpdMatrix::new(sigma_t.clone()).unwrap(), beta).unwrap();
        let next = state.framework_step(&g_hat, &g_sigma).unwrap();
        let current = state.params.clone();
        let linear = &g_hat - &g_sigma * &mu_t * 2.0;
        let objective = |mu: &DVector<f64>, sigma: &DMatrix<f64>| -> f64 {
            let second = sigma + mu * mu.transpose();
            let inner = mu.dot(&linear) + (&g_sigma * second).trace();
            let p = GaussianParams::new(mu.clone(), SpdMatrix::new(sigma.clone()).unwrap()).unwrap();
            beta * inner + kl_gaussian(&p, &current).unwrap()
        };
        let mu_star = next.params.mu.clone();
        let sigma_star = next.params.sigma.as_matrix().clone();
        let best = objective(&mu_star, &sigma_star);
        let root = next.sqrt_sigma.as_matrix().clone();
        for _ in 0..1000 {
            let u = gaussian_vec(&mut rng, d);
            let radius = 1e-2 * rng.random::<f64>();
            let mu = &mu_star + u.normalize() * radius * mu_star.norm().max(1.0);
            let e = gaussian_mat(&mut rng, d, d);
            let e = (&e + e.transpose()) * 0.5;
            let e_norm = e.clone().symmetric_eigen().eigenvalues.abs().max();
            let scale = 1e-2 * rng.random::<f64>() / e_norm;
            let inner = DMatrix::identity(d, d) + e * scale;
            let sigma = &root * inner * &root;
            let sigma = (&sigma + sigma.transpose()) * 0.5;
            let value = objective(&mu, &sigma);
            let gap = value - best;
            min_gap = min_gap.min(gap);
            if gap < -1e-12 * best.abs().max(1.0) {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} of 50000 perturbations improved the objective, smallest gap {min_gap:.2e}"))
}

fn algorithm_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);

    // INGO equals the framework step fed with the oracle batch estimates.
    let mut composition_err: f64 = 0.0;
    let mut clamped = 0;
    for _ in 0..50 {
        let d = rng.random_range(1..=5);
        let n = 8;
        let state = GaussianSearchState::new(
            gaussian_vec(&mut rng, d),
            SpdMatrix::new(random_spd(&mut rng, d, 0.3)).unwrap(),
            rng.random_range(0.01..0.1),
        )
        .unwrap();
        let z = gaussian_mat(&mut rng, n, d);
        let fitness: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let h = oracle_weights(&fitness);
        let inv_sqrt = state.inv_sqrt_sigma.as_matrix();
        let mut g_hat = DVector::zeros(d);
        let mut g_sigma = DMatrix::zeros(d, d);
        for i in 0..n {
            let w = inv_sqrt * z.row(i).transpose();
            g_hat += &w * (h[i] / n as f64);
            g_sigma += &w * w.transpose() * (0.5 * h[i] / n as f64);
        }
        let g_sigma = (&g_sigma + g_sigma.transpose()) * 0.5;
        let batch = DirectionBatch::new(z, DirectionKind::Iid);
        let a = state.ingo_tell(&batch, &fitness).unwrap();
        let b = state.framework_step(&g_hat, &g_sigma).unwrap();
        if a.safeguard_activated || b.safeguard_activated {
            clamped += 1;
            continue;
        }
        composition_err = composition_err
            .max((&a.params.mu - &b.params.mu).abs().max())
            .max(max_abs_diff(a.inv_sigma.as_matrix(), b.inv_sigma.as_matrix()));
    }

    // Fast-INGO equals INGO in one dimension.
    let mut diag_err: f64 = 0.0;
    for _ in 0..200 {
        let mu = DVector::from_element(1, rng.random_range(-3.0..3.0));
        let var: f64 = rng.random_range(0.05..4.0);
        let beta = rng.random_range(0.01..1.0);
        let z = gaussian_mat(&mut rng, 6, 1);
        let fitness: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
        let batch = DirectionBatch::new(z, DirectionKind::Iid);
        let full = GaussianSearchState::new(mu.clone(), SpdMatrix::from_diagonal(&[var]).unwrap(), beta)
            .unwrap()
            .ingo_tell(&batch, &fitness)
            .unwrap();
        let diag = DiagonalSearchState::new(mu, DVector::from_element(1, var), beta)
            .unwrap()
            .fast_ingo_tell(&batch, &fitness)
            .unwrap();
        let mu_err = (full.params.mu[0] - diag.mu[0]).abs() / full.params.mu[0].abs().max(1.0);
        let prec_err = (full.inv_sigma[(0, 0)] - diag.inv_var[0]).abs() / diag.inv_var[0].max(1.0);
        diag_err = diag_err.max(mu_err).max(prec_err);
    }

    // INGOstep shares INGO's precision trajectory bit for bit on shared streams.
    let d = 4;
    let start = GaussianSearchState::new(DVector::from_element(d, 0.5), SpdMatrix::from_diagonal(&vec![0.25; d]).unwrap(), 0.25).unwrap();
    let (mut ingo, mut step) = (start.clone(), start);
    let mut identical = true;
    let mut mean_moved = false;
    for _ in 0..200 {
        let batch = DirectionBatch::new(gaussian_mat(&mut rng, 8, d), DirectionKind::Iid);
        let fitness: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
        ingo = ingo.ingo_tell(&batch, &fitness).unwrap();
        step = step.ingostep_tell(&batch, &fitness).unwrap();
        identical &= ingo.inv_sigma.as_matrix().as_slice() == step.inv_sigma.as_matrix().as_slice();
        mean_moved |= ingo.params.mu != step.params.mu;
    }

    outcome(
        composition_err <= 1e-10 && clamped < 10 && diag_err <= 1e-12 && identical && mean_moved,
        format!(
            "composition {composition_err:.1e} ({clamped} clamped instances skipped), d=1 diagonal {diag_err:.1e}, INGOstep precision identical: {identical}, means differ: {mean_moved}"
        ),
    )
}

fn run(config: &RunConfig) -> ingo::harness::Summary {
    run_experiment(config).unwrap_or_else(|e| panic!("{config:?} failed: {e}")).summary
}

fn scaled_convergence() -> Outcome {
    let cases: [(Algorithm, &[&str]); 3] = [
        (Algorithm::Ingo, &["ellipsoid", "levy"]),
        (Algorithm::Ingostep, &["ellipsoid", "levy"]),
        (Algorithm::FastIngo, &["ellipsoid", "l1_ellipsoid", "lhalf_ellipsoid", "discus"]),
    ];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for (algorithm, functions) in cases {
        for &function in functions {
            let finals: Vec<f64> = (0..5)
                .map(|seed| {
                    let mut cfg = RunConfig::new(algorithm, function, 20, seed, 200_000);
                    cfg.target = Some(1e-8);
                    run(&cfg).final_best
                })
                .collect();
            let m = median(&finals);
            worst = worst.max(m);
            if !(m <= 1e-8) {
                failures.push(format!("{algorithm}/{function} median {m:.2e}"));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("8 cells reach 1e-8, worst median {worst:.2e}")
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty(), detail)
}

fn inverse_update_stability() -> Outcome {
    let mut ingo_best = Vec::new();
    let mut igo_best = Vec::new();
    let mut ingo_guards = 0;
    let mut igo_guards = 0;
    for seed in 0..5 {
        let mut cfg = RunConfig::new(Algorithm::Ingo, "ellipsoid", 20, seed, 100_000);
        let s = run(&cfg);
        ingo_best.push(s.final_best);
        ingo_guards += s.safeguard_activations;
        cfg.algorithm = Algorithm::Igo;
        let s = run(&cfg);
        igo_best.push(s.final_best);
        igo_guards += s.safeguard_activations;
    }
    let (a, b) = (median(&ingo_best), median(&igo_best));
    let ratio_ok = a * 1e3 <= b;
    let guard_ok = igo_guards > 0 && ingo_guards == 0;
    outcome(
        ratio_ok || guard_ok,
        format!(
            "median best INGO {a:.2e} vs IGO {b:.2e}; safeguard activations INGO {ingo_guards}, IGO {igo_guards}"
        ),
    )
}

fn covariance_contraction() -> Outcome {
    let (beta, b) = (0.1, 0.5);
    let d = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mu = DVector::from_fn(d, |_, _| rng.random::<f64>());
    let state = GaussianSearchState::new(mu, SpdMatrix::from_diagonal(&vec![0.25; d]).unwrap(), beta).unwrap();
    let rule = GaussianRule::Framework { clip: Some(ClipBounds { b, gamma_half: 2.0 }) };
    let mut opt = GaussianOptimizer::new(state, rule);
    let mut violations = 0;
    let mut tightest = 0.0_f64;
    for t in 2..=501u64 {
        let batch = opt.ask(10, &mut rng).unwrap();
        let fitness: Vec<f64> =
            (0..10).map(|i| Benchmark::Ellipsoid.value(batch.candidates.row(i).transpose().as_slice())).collect();
        opt.tell(&batch, &fitness).unwrap();
        let norm = opt.state.inv_sigma.as_matrix().clone().symmetric_eigen().eigenvalues.min().recip();
        let bound = 1.0 / (2.0 * (t - 1) as f64 * beta * b);
        tightest = tightest.max(norm / bound);
        if norm > bound {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("{violations} violations over 500 steps, max ||Sigma_t|| / bound = {tightest:.3}"))
}

fn discrete_reconstruction() -> Outcome {
    let d = 100;
    let n = discrete_population_size(d);
    let runs = |algorithm: Algorithm| -> Vec<ingo::harness::Summary> {
        (0..10)
            .map(|seed| {
                let mut cfg = RunConfig::new(algorithm, "binary_reconstruction", d, seed, 100_000);
                cfg.population = Setting::Value(n);
                cfg.beta = Setting::Value(1.0 / d as f64);
                run(&cfg)
            })
            .collect()
    };
    let ingo = runs(Algorithm::BernoulliIngo);
    let ga = runs(Algorithm::Ga);
    let final_ingo = median(&ingo.iter().map(|s| s.final_batch_mean).collect::<Vec<_>>());
    let initial_ingo = median(&ingo.iter().map(|s| s.initial_batch_mean.unwrap()).collect::<Vec<_>>());
    let final_ga = median(&ga.iter().map(|s| s.final_batch_mean).collect::<Vec<_>>());
    let best_ingo = median(&ingo.iter().map(|s| s.final_best).collect::<Vec<_>>());
    let best_ga = median(&ga.iter().map(|s| s.final_best).collect::<Vec<_>>());
    outcome(
        final_ingo <= 0.02 * initial_ingo && final_ingo < final_ga,
        format!(
            "N={n}, median population regret INGO {final_ingo:.3} (initial {initial_ingo:.1}) vs GA {final_ga:.3}; best-so-far {best_ingo:.3} vs {best_ga:.3}"
        ),
    )
}

fn orthogonal_variance() -> Outcome {
    let d = 16;
    let reps = 10_000;
    let mu = DVector::from_element(d, 0.5);
    let f_center = sphere(&mu);
    let identity = DMatrix::identity(d, d);
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut variance = |kind: DirectionKind| -> f64 {
        let estimates: Vec<DVector<f64>> = (0..reps)
            .map(|_| {
                let z = DirectionBatch::draw(kind, d, d, &mut rng).unwrap();
                let probes: Vec<f64> = (0..d).map(|i| sphere(&(&mu + z.z.row(i).transpose()))).collect();
                grad_mu_batch_with_factor(&identity, &z, f_center, &probes).unwrap()
            })
            .collect();
        let mean = estimates.iter().fold(DVector::zeros(d), |acc, g| acc + g) / reps as f64;
        estimates.iter().map(|g| (g - &mean).norm_squared()).sum::<f64>() / (reps - 1) as f64
    };
    let iid = variance(DirectionKind::Iid);
    let orth = variance(DirectionKind::Orthogonal);
    outcome(orth <= iid, format!("total variance orthogonal {orth:.3} vs i.i.d. {iid:.3}"))
}

fn determinism() -> Outcome {
    let configs = [
        (Algorithm::Ingo, "ellipsoid", 8),
        (Algorithm::Framework, "levy", 6),
        (Algorithm::FastIngo, "rastrigin10", 10),
        (Algorithm::Es, "sphere", 5),
        (Algorithm::Igo, "discus", 4),
        (Algorithm::BernoulliIngo, "binary_reconstruction", 30),
        (Algorithm::CategoricalIngo, "binary_reconstruction", 30),
        (Algorithm::Ga, "binary_reconstruction", 30),
    ];
    let bytes = |cfg: &RunConfig| -> Vec<u8> {
        let mut buf = Vec::new();
        write_trace_to(&run_experiment(cfg).unwrap().rows, &mut buf).unwrap();
        buf
    };
    let mut mismatches = Vec::new();
    for (algorithm, function, dim) in configs {
        let mut cfg = RunConfig::new(algorithm, function, dim, 42, 3_000);
        let first = bytes(&cfg);
        let again = bytes(&cfg);
        cfg.threads = 8;
        let parallel = bytes(&cfg);
        if first != again || first != parallel {
            mismatches.push(algorithm.to_string());
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} configurations byte-identical at 1 and 8 threads", configs.len())
        } else {
            format!("traces differ for {}", mismatches.join(", "))
        },
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "estimator unbiasedness", estimator_unbiasedness, Some(Duration::from_secs(10))),
        (2, "natural-gradient equivalence", natural_gradient_equivalence, Some(Duration::from_secs(1))),
        (3, "trust-region optimality", trust_region_optimality, Some(Duration::from_secs(30))),
        (4, "algorithm identities", algorithm_identities, None),
        (5, "scaled benchmark convergence", scaled_convergence, Some(Duration::from_secs(300))),
        (6, "inverse-update stability", inverse_update_stability, Some(Duration::from_secs(120))),
        (7, "covariance contraction bound", covariance_contraction, None),
        (8, "discrete reconstruction", discrete_reconstruction, Some(Duration::from_secs(120))),
        (9, "orthogonal sampling variance", orthogonal_variance, Some(Duration::from_secs(30))),
        (10, "determinism across threads", determinism, None),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = result.pass && in_time;
        failed += usize::from(!pass);
        let budget = limit.map(|l| format!(" of {}s", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {id:>2} {name}: {} ({}; {:.2}s{budget})",
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
