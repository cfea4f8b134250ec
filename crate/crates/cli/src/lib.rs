//! Experiment harness for `scout-core`.
//!
//! An [`ExperimentConfig`] names a target, one or more sampler rows, a run
//! length and a replicate count. [`run_experiment`] executes every replicate
//! on a thread pool and writes `samples.csv`, `report.json` and the optional
//! projection, trace and factor exports per replicate, plus `summary.json`,
//! `summary.csv`, `plot.gp` and `manifest.json` for the experiment.

use std::path::{Path, PathBuf};

pub mod config;
pub mod experiment;
pub mod export;
pub mod presets;

pub use config::{
    DiagnosticsOptions, ExperimentConfig, ExportOptions, SamplerSpec, SharedTarget, TargetSpec,
};
pub use experiment::{
    aggregate, execute, run_experiment, AggregateRow, ExperimentOutput, JobOutcome, Manifest, MetricSummary,
};
pub use presets::{preset, preset_names};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numerical(_) => 3,
            HarnessError::Io { .. } => 1,
        }
    }
}
