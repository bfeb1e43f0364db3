//! Sweep orchestration and report output.

mod config;
mod pipeline;
mod report;

pub use config::{Environment, ExperimentConfig, ScenarioLabel};
pub use pipeline::{
    analyze_trace, run_sweep, simulate_cell, AnalysisParams, CellOutcome, CellResult, CurvePoint, KdrTable, MwaEntry,
    SweepResult,
};
pub use report::emit_reports;
