//! INGO against the two baselines it is measured against: IGO, which updates
//! `Σ` directly, and antithetic ES with a fixed isotropic spread.

use ingo::harness::{run_experiment, Algorithm, RunConfig};

fn main() -> ingo::Result<()> {
    let d = 10;
    println!("{:10} {:>12} {:>12}", "algorithm", "ellipsoid", "levy");
    for algo in [Algorithm::Ingo, Algorithm::Igo, Algorithm::Es] {
        let mut row = format!("{:10}", algo.name());
        for f in ["ellipsoid", "levy"] {
            let mut cfg = RunConfig::new(algo, f, d, 0, 50_000);
            cfg.target = Some(1e-10);
            let out = run_experiment(&cfg)?;
            row += &format!(" {:>12.3e}", out.summary.final_best);
        }
        println!("{row}");
    }
    Ok(())
}
