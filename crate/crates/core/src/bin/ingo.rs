use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ingo::harness::{self, Algorithm, RunConfig, Setting, SweepConfig};
use ingo::{DirectionKind, Result};

#[derive(Parser)]
#[command(name = "ingo", version, about = "Implicit natural gradient black-box optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded experiment and write its trace.
    Run {
        #[arg(long)]
        algo: String,
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget: u64,
        #[arg(long, default_value = "auto")]
        beta: String,
        #[arg(long, default_value = "auto")]
        pop: String,
        #[arg(long)]
        target: Option<f64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// iid, antithetic or orthogonal
        #[arg(long)]
        sampler: Option<String>,
        #[arg(long, default_value_t = 1)]
        log_every: u64,
        /// Fill the wall_ms column.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every combination listed in a JSON sweep file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Aggregate run summaries into a median/IQR table.
    Table {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { algo, function, dim, seed, budget, beta, pop, target, threads, sampler, log_every, timing, out } => {
            let algorithm: Algorithm = algo.parse()?;
            let mut config = RunConfig::new(algorithm, function, dim, seed, budget);
            config.beta = beta.parse::<Setting<f64>>()?;
            config.population = pop.parse::<Setting<usize>>()?;
            config.target = target;
            config.threads = threads;
            config.sampler = sampler
                .map(|s| s.parse::<DirectionKind>())
                .transpose()?;
            config.log_every = log_every;
            config.record_timing = timing;
            let summary = harness::run_to_files(&config, &out)?;
            println!(
                "{} on {} (d={}, seed={}): best {:e} after {} evals ({:?})",
                summary.algorithm, summary.objective, summary.dim, summary.seed, summary.final_best, summary.evals,
                summary.termination
            );
        }
        Command::Sweep { config } => {
            let sweep = SweepConfig::from_json_file(&config)?;
            let summaries = harness::run_sweep(&sweep)?;
            println!("{} runs written to {}", summaries.len(), sweep.out_dir.display());
        }
        Command::Table { input, out } => {
            let rows = harness::summarize(&harness::load_summaries(&input)?);
            harness::write_table(&rows, &out)?;
            println!("{} rows written to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
