//! Experiment configuration, time loop, drivers and CSV output.

pub mod config;
pub mod experiments;
pub mod pattern;
pub mod report;
pub mod timeloop;

pub use config::{Experiment, ExperimentConfig, MaterialPattern};
pub use experiments::{
    plan, run_convergence, run_experiment, run_plan, run_table1_left, run_table1_right, run_table2,
    PlannedRun,
};
pub use pattern::{material_a, material_b, material_pattern};
pub use report::{ExperimentReport, ReportRow, CSV_HEADER};
pub use timeloop::{time_loop, Forcing, RunOutcome, Setup};
