//! Monte-Carlo experiments: TOML specs, seeded batch runs and reports.

pub mod report;
pub mod runner;
pub mod spec;
pub mod stats;

pub use report::{
    CheckSummary, ConfigSummary, ExperimentReport, ReportError, ReportFormat, SecrecySummary,
};
pub use runner::{
    derive_seed, run_experiment, run_experiment_with, RunOptions, RunRecord, RunSecrecy,
};
pub use spec::{load_spec, Configuration, ExperimentSpec, SpecError, SweepAxis, SweptValue};
