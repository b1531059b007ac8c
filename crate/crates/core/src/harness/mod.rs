//! Sweeps, rate fits and report emission.

mod config;
mod experiments;
mod fit;
mod report;

pub use config::{
    Experiment, SweepConfig, DAMPED_F, DAMPED_G, DAMPED_SHIFTED, DEFAULT_N_LIST, HEIGHT_PLUS_TWO,
};
pub use experiments::{random_hermitian, run_experiment, volume_integral, HEIGHT};
pub use fit::{fit_rate, least_squares_slope, RateFit, METRIC_FLOOR};
pub use report::{
    emit_report, fit_metric, Check, ConvergenceReport, Fit, Row, Verdict, ROUNDOFF_FLOOR,
};
