//! Named experiments, their TOML configs, and CSV/JSON reports.

mod config;
mod experiments;
mod report;

pub use config::{Experiment, ExperimentConfig, FamilyConfig, GridConfig, SolverConfig, StudyConfig, Tolerances};
pub use experiments::{gradient_duality_defect, run};
pub use report::{emit_plot_data, Check, ExperimentReport, PlotSeries, ReportRow, Series};
