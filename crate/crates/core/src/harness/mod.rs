//! Experiment configuration, seeded orchestration and result artifacts.

mod config;
mod csv;
mod plot;
mod runner;
mod sweep;

pub use config::{parse_env_file, EvalSetting, ExperimentConfig, ExperimentKind};
pub use csv::{parse_csv, read_csv, render_csv, write_csv, CsvRow, CSV_HEADER};
pub use plot::{aggregate, emit_plot, render_svg, Curve};
pub use runner::{eval_schedule, run_experiment, run_rng, run_single, sustained_crossing, EvalRow, RunResult, RunSpec};
pub use sweep::{
    render_summary, run_sweep, summarize, value_csv_path, write_summary, SweepRow, SUMMARY_HEADER,
};
