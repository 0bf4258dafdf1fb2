//! Experiment files, sweeps and CSV output behind the command-line tool.

pub mod config;
pub mod csv;
pub mod presets;
pub mod sweep;

pub use config::{parse_config, Axis, ExperimentSpec, RunPlan, SpecError};
pub use presets::{Preset, PRESETS};
pub use sweep::{run_single, run_sweep, simulate, ExpError, RunOutput, SummaryRow};
