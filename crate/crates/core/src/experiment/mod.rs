//! Experiment harness: configs, scaling sweeps, transition scans, exponent
//! fits and the point-statistics check. Every sweep gathers its cells in a
//! fixed order, so output files do not depend on the worker count.

mod a2;
mod config;
mod fit;
mod harness;

pub use a2::{a2_check, sample_margin, A2Report, A2Row, A2Summary};
pub use config::{ExperimentConfig, Process, SizeLimits, KEYS};
pub use fit::{fit_samples, median, ols, ScalingFit};
pub use harness::{
    cell_seed, fit_exponent, run_cell, run_scaling, sample_process, transition_scan, write_rows, CellStatus,
    ScalingRow, Statistic, TransitionPoint, TransitionReport, Verdict, SCALING_HEADER,
};
