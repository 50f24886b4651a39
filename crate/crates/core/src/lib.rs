//! Consensus over time-varying networks with persistent and vanishing
//! arcs.

pub mod analysis;
pub mod dynamics;
pub mod graph;
pub mod scenario;
pub mod weights;

pub use analysis::{metrics, AgreementMetrics, AnalysisError, RateCertificate, StateSeries};
pub use dynamics::{BeliefVector, ContinuousTrajectory, DynamicsError, Trajectory};
pub use graph::{Arc, Digraph, GraphError, NodeId};
pub use weights::{
    PersistenceReport, TimeMode, TimeVaryingNetwork, Verdict, WeightError, WeightFunction,
};
pub use scenario::{catalog, load_scenario, run_scenario, RunReport, Scenario, ScenarioError};
