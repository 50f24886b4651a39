//! Time-varying arc weights, persistence classification and the
//! assumption checkers.

mod checks;
mod function;
mod network;

pub use checks::{
    check_arc_balance, check_cut_balance, check_self_confidence, check_stochasticity,
    check_window_bound, BalanceProbe, CheckReport, CutScope, SubsetSelection, Verdict, Window,
    Witness, ROW_SUM_TOLERANCE,
};
pub use function::{Persistence, TailBound, WeightFunction};
pub use network::{
    persistent_graph, theta, theta_profile, xi0_plus, xi_plus, PersistenceReport, SelfWeight,
    ThetaProfile, TimeVaryingNetwork,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Arc, GraphError};

/// Discrete steps (update rule on integer times) or continuous time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeMode {
    Discrete,
    Continuous,
}

impl std::fmt::Display for TimeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TimeMode::Discrete => "discrete",
            TimeMode::Continuous => "continuous",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("malformed table: {0}")]
    MalformedTable(&'static str),
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tabulated weight has no declared persistence")]
    UndeclaredPersistence,
    #[error("cannot classify weight: {0}")]
    Unclassifiable(&'static str),
    #[error("arc {0} has no weight function")]
    MissingWeight(Arc),
    #[error("weight given for arc {0}, which is not in the graph")]
    UnknownArc(Arc),
    #[error("self weights: expected {expected} entries, got {got}")]
    SelfWeightCount { expected: usize, got: usize },
    #[error("incoming weight at node {node} reaches {value} > 1 at t = {t}")]
    IncomingWeightTooLarge { node: usize, t: f64, value: f64 },
    #[error("operation requires {expected} mode")]
    ModeMismatch { expected: TimeMode },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
