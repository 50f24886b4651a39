//! Discrete-time update `x_i(t+1) = Σ_{j ∈ N_i} W_ij(t) x_j(t)`.

use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::analysis::StateSeries;
use crate::graph::NodeId;
use crate::weights::{TimeMode, TimeVaryingNetwork, ROW_SUM_TOLERANCE};

/// Beliefs of all nodes at one integer time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector {
    pub time: u64,
    pub values: Vec<f64>,
}

impl BeliefVector {
    pub fn new(time: u64, values: Vec<f64>) -> Self {
        BeliefVector { time, values }
    }
}

/// Every state from `t0` to `t0 + horizon`, one per step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: u64,
    pub states: Vec<BeliefVector>,
}

impl StateSeries for Trajectory {
    fn len(&self) -> usize {
        self.states.len()
    }

    fn time(&self, k: usize) -> f64 {
        self.states[k].time as f64
    }

    fn values(&self, k: usize) -> &[f64] {
        &self.states[k].values
    }
}

fn hull(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

pub(crate) fn check_state(net: &TimeVaryingNetwork, values: &[f64]) -> Result<(), DynamicsError> {
    if values.len() != net.node_count() {
        return Err(DynamicsError::DimensionMismatch {
            expected: net.node_count(),
            got: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFinite { node: i });
    }
    Ok(())
}

/// One application of the update rule at time `x.time`.
///
/// Aborts with [`DynamicsError::RowSumViolation`] if some row of weights
/// does not sum to one within [`ROW_SUM_TOLERANCE`], or has a negative
/// entry. Each new value is a convex combination of the old ones; the
/// result is clamped to the old hull so rounding cannot leak past it.
pub fn step(net: &TimeVaryingNetwork, x: &BeliefVector) -> Result<BeliefVector, DynamicsError> {
    if net.mode() != TimeMode::Discrete {
        return Err(DynamicsError::ModeMismatch {
            expected: TimeMode::Discrete,
        });
    }
    check_state(net, &x.values)?;
    let t = x.time as f64;
    let (lo, hi) = hull(&x.values);
    let mut next = Vec::with_capacity(x.values.len());
    for i in 0..net.node_count() {
        let own = net.self_weight(t, NodeId(i));
        let mut total = own;
        let mut acc = own * x.values[i];
        let mut negative = own < 0.0;
        for &(j, k) in net.incoming(NodeId(i)) {
            let w = net.weights()[k].eval(t);
            negative |= w < 0.0;
            total += w;
            acc += w * x.values[j];
        }
        let residual = (total - 1.0).abs();
        if residual > ROW_SUM_TOLERANCE || negative {
            return Err(DynamicsError::RowSumViolation {
                node: i,
                t: x.time,
                residual,
            });
        }
        next.push(acc.clamp(lo, hi));
    }
    Ok(BeliefVector {
        time: x.time + 1,
        values: next,
    })
}

/// Iterates [`step`] `horizon` times; the result holds `horizon + 1` states.
pub fn simulate(
    net: &TimeVaryingNetwork,
    x0: BeliefVector,
    horizon: u64,
) -> Result<Trajectory, DynamicsError> {
    check_state(net, &x0.values)?;
    let t0 = x0.time;
    let mut states = Vec::with_capacity(horizon as usize + 1);
    states.push(x0);
    for _ in 0..horizon {
        let next = step(net, states.last().expect("nonempty"))?;
        states.push(next);
    }
    Ok(Trajectory { t0, states })
}
