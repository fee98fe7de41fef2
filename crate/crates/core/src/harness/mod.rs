//! Experiment configuration, orchestration and artifact output.
//!
//! [`run_experiment`] is a pure function of the resolved config: it builds
//! the initial data, runs the flows (sweeps fan out through
//! [`crate::parallel`]), and writes CSVs, a summary and a manifest into the
//! output directory. When a flow fails, the trajectory up to the failure is
//! still written before the error is returned.

mod config;
mod experiments;
pub mod fit;
pub mod io;

use std::path::PathBuf;

use thiserror::Error;

use crate::error::CurveError;

pub use config::{
    ExperimentConfig, ExperimentName, GammaConvergenceExperiment, IcmScalingExperiment,
    IncompCompareExperiment, NodalBlock, OperatorsExperiment, PhaseSepExperiment,
};
pub use experiments::{gamma_report, run_experiment, ExperimentOutcome, GammaReport};

/// Environment variable that relocates relative output directories.
pub const OUTPUT_ROOT_ENV: &str = "CURVEFLOW_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: CurveError,
    },

    #[error("integration failed in {run}: {source} (partial outputs kept in {})", dir.display())]
    Integration {
        run: String,
        dir: PathBuf,
        #[source]
        source: CurveError,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON output failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn model(context: impl Into<String>) -> impl FnOnce(CurveError) -> HarnessError {
        let context = context.into();
        move |source| HarnessError::Model { context, source }
    }

    /// Process exit status: 2 for configuration problems, 3 for integration
    /// failures, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Model { source, .. } => match source {
                CurveError::InvalidGrid(_)
                | CurveError::InvalidParameter(_)
                | CurveError::NodalModel(_)
                | CurveError::TransitionGap { .. } => 2,
                _ => 3,
            },
            HarnessError::Integration { .. } => 3,
            HarnessError::Io { .. } | HarnessError::Csv(_) | HarnessError::Json(_) => 1,
        }
    }
}
