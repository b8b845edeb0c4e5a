//! Seeded replicate runs, summaries, closed-form expectations and CSV output.

pub mod figures;
pub mod oracles;
pub mod output;
pub mod runner;
pub mod stats;

pub use figures::Figure;
pub use oracles::{
    expected_epidemic_interactions, expected_epidemic_parallel_time, expected_pse_counters_at_half, harmonic,
    le_deadline,
};
pub use output::{emit_runs_csv, emit_summary_csv, RUNS_HEADER, SUMMARY_HEADER};
pub use runner::{
    derive_seed, median_estimate, repeat_median_estimate, run_replicate, run_replicates, DeadlineMode,
    ExperimentConfig, RunRecord,
};
pub use stats::{summarize, Metric, SummaryRow};
