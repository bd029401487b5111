//! Experiment harness for sketched least squares: configuration, batch runs,
//! d sweeps, single-instance bound checks and figure data bundles.

pub mod check;
pub mod config;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod source;
pub mod sweep;

pub use config::{DRule, ExperimentConfig, SolverChoice, StopSpec};
pub use error::{CliError, Result};
pub use experiment::{exit, run_experiment, BatchOutcome};
pub use figures::emit_figure_data;
pub use source::MatrixSource;
pub use sweep::sweep_d;
