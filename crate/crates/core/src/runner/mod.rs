//! Experiment orchestration: configuration, cost estimates, parallel runs,
//! artifacts on disk and plot tables.

pub mod artifact;
pub mod config;
pub mod cost;
pub mod emit;
pub mod presets;
pub mod run;

pub use artifact::{RunArtifact, TimeDiagnostics, TimeResult};
pub use config::{ExperimentConfig, ExperimentKind, WORKERS_ENV};
pub use cost::{estimate_cost, CostEstimate};
pub use emit::emit_plot_data;
pub use presets::{Preset, PRESETS};
pub use run::{fit_artifact, r_tilde_curve, run_experiment, RunOptions};
