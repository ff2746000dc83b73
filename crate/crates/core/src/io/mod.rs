//! Scenario files, trajectory CSVs, reports and the end-to-end `run` pipeline.

mod config;
mod report;
mod run;
mod svg;
mod table;

pub use config::{
    load_scenario, DampingConfig, DsConfig, OutputConfig, RandomStarts, ScenarioConfig, StartConfig,
};
pub use report::{
    detect_hold_windows, emit_report, HoldWindowReport, ReportTolerances, TrajectoryReport,
};
pub use run::{
    build_nominal, compile_policy, run_command, sample_via, RunOptions, RunOutcome, RunReport,
    ScenarioReport, DT_CHECK_TOL, EXIT_ERROR, EXIT_NON_CONVERGENCE, EXIT_OK,
};
pub use svg::render_svg;
pub use table::{
    load_demo_csv, read_trajectory_csv, write_plot_csv, write_trajectory_csv, write_via_csv,
    PLOT_HEADER, TRAJECTORY_HEADER,
};
