//! Experiment plumbing: ratings and coverage ingestion, TOML configs, sweep
//! execution and CSV output.

mod config;
mod data;
mod run;

pub use config::{
    ConstraintKind, ExperimentConfig, MirrorKind, ObjectiveKind, OutputRuleKind, ScheduleKind, SolverKind, StartKind,
};
pub use data::{
    load_coverage, load_ratings, parse_coverage, parse_ratings, ratings_to_tsv, ParseReport, RatingsFormat,
    SyntheticRatings,
};
pub use run::{
    build_problem, emit_csv, read_csv, run_experiment, run_on_problem, write_csv, Problem, RunRecord, CSV_HEADER,
};
