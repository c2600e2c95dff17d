//! Seeded experiment runs, traces, sweeps and summary tables.

mod config;
mod eval;
mod runner;
mod summary;
mod sweep;
mod trace;

pub use config::{
    default_population_size, discrete_population_size, Algorithm, InitConfig, ResolvedConfig, RunConfig, Setting,
    DEFAULT_COLLAPSE_EIGENVALUE, DEFAULT_INIT_STD,
};
pub use eval::{batch_evaluate, matrix_rows, Evaluator};
pub use runner::{derive_seed, run_experiment, RunOutput};
pub use summary::{
    iqr, load_summaries, median, quantile_sorted, read_table, summarize, write_table, AggregateRow, Summary,
    Termination,
};
pub use sweep::{run_sweep, run_to_files, trace_file_name, OneOrMany, SweepConfig};
pub use trace::{read_trace, read_trace_from, summary_path_for, write_trace, write_trace_to, TraceRow, TRACE_HEADER};
