//! Belief dynamics in discrete and continuous time.

pub mod continuous;
pub mod discrete;

pub use continuous::{
    derivative, integrate, integrate_with, ContinuousTrajectory, IntegratorOptions, StepRecord,
};
pub use discrete::{simulate, step, BeliefVector, Trajectory};

use thiserror::Error;

use crate::weights::TimeMode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("row {node} at t = {t} is not stochastic (|sum - 1| = {residual:e})")]
    RowSumViolation { node: usize, t: u64, residual: f64 },
    #[error("state has {got} entries, network has {expected} nodes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("belief of node {node} is not finite")]
    NonFinite { node: usize },
    #[error("operation requires {expected} mode")]
    ModeMismatch { expected: TimeMode },
    #[error("invalid integration interval [{t0}, {t_end}]")]
    InvalidInterval { t0: f64, t_end: f64 },
    #[error("invalid integrator options: {0}")]
    InvalidOptions(&'static str),
    #[error("step size underflow at t = {t} (h = {h:e}); weights are too large")]
    StepUnderflow { t: f64, h: f64 },
}
