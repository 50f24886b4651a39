//! Scenario files, the built-in catalog, runs and their reports.

mod catalog;
mod config;
mod csv_io;
mod random;
mod report;
mod run;

pub use catalog::{catalog, find, s1, s2, s3, s3c, s4, s5, s6};
pub use config::{
    load_scenario, save_scenario, ArcSpec, CertificateSpec, CheckSpec, CutScopeKind, Expect,
    InitialCondition, IntegratorConfig, OutputConfig, ProbeKind, Scenario, StartRule, StartTime,
    DEFAULT_H_MAX, SCHEMA_VERSION,
};
pub use csv_io::{
    emit_trajectory_csv, format_real, read_trajectory_csv, strided_indices, CsvTrajectory,
};
pub use random::{random_balanced_network, random_scenario};
pub use report::{load_report, Outcome, PersistenceSummary, Real, RunReport};
pub use run::{
    check_times, execute, run_checks, run_scenario, RunOptions, RunOutput, Simulated,
    CHECK_SAMPLES, CONTINUOUS_HULL_TOLERANCE, DISCRETE_HULL_TOLERANCE, FLOOR_TOLERANCE,
};

use std::path::Path;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::dynamics::DynamicsError;
use crate::graph::GraphError;
use crate::weights::WeightError;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {message}")]
    Parse { message: String },
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<ScenarioError>,
    },
    #[error("scenario {name}: {source}")]
    InScenario {
        name: String,
        #[source]
        source: Box<ScenarioError>,
    },
    #[error("cannot serialize scenario: {0}")]
    Serialize(String),
    #[error("malformed trajectory CSV: {0}")]
    MalformedCsv(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl ScenarioError {
    pub(crate) fn in_file(self, path: &Path) -> Self {
        ScenarioError::InFile {
            path: path.display().to_string(),
            source: Box::new(self),
        }
    }

    pub(crate) fn in_scenario(self, name: &str) -> Self {
        match self {
            e @ ScenarioError::InScenario { .. } => e,
            e => ScenarioError::InScenario {
                name: name.to_string(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, past file and scenario context.
    pub fn root(&self) -> &ScenarioError {
        match self {
            ScenarioError::InFile { source, .. } | ScenarioError::InScenario { source, .. } => {
                source.root()
            }
            e => e,
        }
    }

    /// True for errors in the scenario file itself rather than in a run.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self.root(),
            ScenarioError::Io { .. }
                | ScenarioError::Parse { .. }
                | ScenarioError::Validation { .. }
                | ScenarioError::Serialize(_)
        )
    }
}
