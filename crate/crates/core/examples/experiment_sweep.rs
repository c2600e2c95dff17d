//! Seeded experiments end to end: a small sweep written to disk, then the
//! median/IQR table built from the run summaries.

use ingo::harness::{load_summaries, run_sweep, summarize, write_table, OneOrMany, SweepConfig};
use ingo::harness::{Algorithm, RunConfig, Setting};

fn main() -> ingo::Result<()> {
    let out_dir = std::env::temp_dir().join("ingo-sweep-example");
    let base = RunConfig::new(Algorithm::Ingo, "sphere", 5, 0, 20_000);
    let sweep = SweepConfig {
        algorithm: OneOrMany::Many(vec![Algorithm::Ingo, Algorithm::FastIngo, Algorithm::Es]),
        objective: OneOrMany::Many(vec!["sphere".into(), "levy".into()]),
        dim: OneOrMany::One(5),
        seed: OneOrMany::Many((0..5).collect()),
        budget: base.budget,
        population: Setting::Auto,
        beta: Setting::Auto,
        target: Some(1e-8),
        init: base.init,
        threads: 2,
        sampler: None,
        clip: None,
        max_iterations: None,
        collapse_eigenvalue: base.collapse_eigenvalue,
        log_every: 10,
        record_timing: false,
        out_dir: out_dir.clone(),
    };
    println!("{}", serde_json::to_string_pretty(&sweep).unwrap());
    let summaries = run_sweep(&sweep)?;
    println!("{} runs written to {}", summaries.len(), out_dir.display());

    let rows = summarize(&load_summaries(&format!("{}/*.summary.json", out_dir.display()))?);
    write_table(&rows, out_dir.join("table.csv"))?;
    for r in rows {
        println!(
            "{:10} {:7} median best {:.2e}  hits {}/{}  median evals to target {:?}",
            r.algorithm, r.objective, r.median_final_best, r.target_hits, r.runs, r.median_evals_to_target
        );
    }
    Ok(())
}
