//! Agreement metrics, rate certificates and bound verifiers.

mod certificates;
mod floors;
mod lemmas;
mod metrics;

pub use certificates::{
    agreement_schedule, continuous_rate_bound, detect_epsilon_agreement, discrete_rate_bound,
    verify_contraction, AgreementSchedule, ContractionReport, EpsilonEstimate, Provenance,
    RateCertificate, CONTINUOUS_TOLERANCE, DISCRETE_TOLERANCE,
};
pub use floors::{
    component_extremes, continuous_floor_certificate, sigma_star_certificate,
    window_violation_threshold, ComponentExtremes, FloorKind, FloorStart, LowerBoundCertificate,
    PRODUCT_TERMS,
};
pub use lemmas::{
    verify_convexity_bound, verify_convexity_bounds, verify_exponential_bound,
    verify_influence_bound, BoundReport, CONTINUOUS_BOUND_TOLERANCE, DISCRETE_BOUND_TOLERANCE,
};
pub use metrics::{hull_drift, metrics, AgreementMetrics, HullDrift, StateSeries};

pub(crate) use certificates::sample_at_or_before;

use thiserror::Error;

use crate::graph::Arc;
use crate::weights::{TimeMode, WeightError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty belief vector or node set")]
    EmptyState,
    #[error("parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("outside the supported regime: {0}")]
    OutOfRegime(String),
    #[error("series too short for a window of length {needed}")]
    TooShort { needed: f64 },
    #[error("{t} is outside the available range")]
    OutOfRange { t: f64 },
    #[error("vanishing-arc weights are not summable")]
    NotSummable,
    #[error("vanishing-arc weights are not integrable")]
    NotIntegrable,
    #[error("vanishing-arc tail {tail} is too heavy to bound the product")]
    TailTooHeavy { tail: f64 },
    #[error("floor {floor} is not positive; start later")]
    FloorNotPositive { floor: f64 },
    #[error("node sets overlap")]
    OverlappingSets,
    #[error("arc {0} is not in the network")]
    UnknownArc(Arc),
    #[error("operation requires {expected} mode")]
    ModeMismatch { expected: TimeMode },
    #[error(transparent)]
    Weight(#[from] WeightError),
}
