//! Continuous-time update `ẋ_i = Σ_j W_ij(t) (x_j - x_i)`.
//!
//! Steps are strong-stability-preserving RK2 (Heun): both stages are
//! forward-Euler updates, and with `h · ξ⁺ <= 1/2` each Euler update is a
//! convex combination of the current beliefs. The new state is an average
//! of convex combinations and stays inside the hull of the old one, so
//! `max` never rises and `min` never falls. Step boundaries land on every
//! weight discontinuity, so no step straddles a jump; the second stage
//! uses left limits at the step end.

use serde::{Deserialize, Serialize};

use super::discrete::check_state;
use super::DynamicsError;
use crate::analysis::StateSeries;
use crate::graph::NodeId;
use crate::weights::{TimeMode, TimeVaryingNetwork};

/// Smallest step the integrator accepts before giving up.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub h_max: f64,
    /// Upper bound on `h · max_i ξ⁺(t; i)` at both ends of a step.
    pub xi_step_cap: f64,
    /// If set, `t0 + k · sample_interval` are forced step boundaries, so
    /// those times appear exactly in the output.
    pub sample_interval: Option<f64>,
}

impl IntegratorOptions {
    pub fn new(h_max: f64) -> Self {
        IntegratorOptions {
            h_max,
            xi_step_cap: 0.5,
            sample_interval: None,
        }
    }

    pub fn with_sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = Some(dt);
        self
    }

    pub fn with_xi_step_cap(mut self, cap: f64) -> Self {
        self.xi_step_cap = cap;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub h: f64,
    pub max_xi: f64,
}

/// States at every step endpoint, starting with the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousTrajectory {
    pub samples: Vec<(f64, Vec<f64>)>,
    pub step_records: Vec<StepRecord>,
}

impl StateSeries for ContinuousTrajectory {
    fn len(&self) -> usize {
        self.samples.len()
    }

    fn time(&self, k: usize) -> f64 {
        self.samples[k].0
    }

    fn values(&self, k: usize) -> &[f64] {
        &self.samples[k].1
    }
}

/// Right-hand side at `t`, using right-continuous weight values.
pub fn derivative(net: &TimeVaryingNetwork, x: &[f64], t: f64) -> Vec<f64> {
    rhs(net, x, t, false)
}

fn rhs(net: &TimeVaryingNetwork, x: &[f64], t: f64, left: bool) -> Vec<f64> {
    (0..net.node_count())
        .map(|i| {
            net.incoming(NodeId(i))
                .iter()
                .map(|&(j, k)| {
                    let w = &net.weights()[k];
                    let wt = if left { w.eval_left(t) } else { w.eval(t) };
                    wt * (x[j] - x[i])
                })
                .sum()
        })
        .collect()
}

fn max_xi(net: &TimeVaryingNetwork, t: f64, left: bool) -> f64 {
    (0..net.node_count())
        .map(|i| {
            if left {
                net.xi_plus_left(t, NodeId(i))
            } else {
                net.xi_plus(t, NodeId(i))
            }
        })
        .fold(0.0, f64::max)
}

/// Integrates from `t0` to `t_end` with the default step cap.
pub fn integrate(
    net: &TimeVaryingNetwork,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    h_max: f64,
) -> Result<ContinuousTrajectory, DynamicsError> {
    integrate_with(net, x0, t0, t_end, &IntegratorOptions::new(h_max))
}

pub fn integrate_with(
    net: &TimeVaryingNetwork,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<ContinuousTrajectory, DynamicsError> {
    if net.mode() != TimeMode::Continuous {
        return Err(DynamicsError::ModeMismatch {
            expected: TimeMode::Continuous,
        });
    }
    check_state(net, x0)?;
    if !(t0 >= 0.0 && t_end > t0 && t_end.is_finite()) {
        return Err(DynamicsError::InvalidInterval { t0, t_end });
    }
    if !(opts.h_max > 0.0) || !(opts.xi_step_cap > 0.0 && opts.xi_step_cap <= 0.5) {
        return Err(DynamicsError::InvalidOptions(
            "h_max must be positive and xi_step_cap in (0, 1/2]",
        ));
    }

    let mut stops = net.breakpoints(t0, t_end);
    if let Some(dt) = opts.sample_interval {
        if !(dt > 0.0) {
            return Err(DynamicsError::InvalidOptions("sample_interval must be positive"));
        }
        let count = ((t_end - t0) / dt).floor() as u64;
        stops.extend((1..=count).map(|k| t0 + k as f64 * dt).filter(|&s| s < t_end));
        stops.sort_by(f64::total_cmp);
        stops.dedup();
    }
    stops.push(t_end);

    let mut t = t0;
    let mut x = x0.to_vec();
    let mut samples = vec![(t, x.clone())];
    let mut step_records = Vec::new();
    for &stop in &stops {
        while t < stop {
            let remaining = stop - t;
            let xi_start = max_xi(net, t, false);
            let mut h = remaining.min(opts.h_max);
            if xi_start > 0.0 {
                h = h.min(opts.xi_step_cap / xi_start);
            }
            let mut xi_end = max_xi(net, t + h, true);
            while h * xi_end > opts.xi_step_cap {
                h *= 0.5;
                xi_end = max_xi(net, t + h, true);
            }
            if h < MIN_STEP && h < remaining {
                return Err(DynamicsError::StepUnderflow { t, h });
            }
            let lands = h >= remaining;
            let t_next = if lands { stop } else { t + h };
            let h = t_next - t;

            let (lo, hi) = x
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let k1 = rhs(net, &x, t, false);
            let x1: Vec<f64> = x.iter().zip(&k1).map(|(v, d)| v + h * d).collect();
            let k2 = rhs(net, &x1, t_next, true);
            x = x
                .iter()
                .zip(x1.iter().zip(&k2))
                .map(|(v, (v1, d))| (0.5 * v + 0.5 * (v1 + h * d)).clamp(lo, hi))
                .collect();
            t = t_next;
            step_records.push(StepRecord {
                h,
                max_xi: xi_start.max(xi_end),
            });
            samples.push((t, x.clone()));
        }
    }
    Ok(ContinuousTrajectory {
        samples,
        step_records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::metrics;
    use crate::graph::{Arc, Digraph};
    use crate::weights::WeightFunction;

    fn pair(w10: WeightFunction, w01: WeightFunction) -> TimeVaryingNetwork {
        let g = Digraph::new(2, [(1, 0), (0, 1)]).unwrap();
        TimeVaryingNetwork::new(
            g,
            [(Arc::new(1, 0), w10), (Arc::new(0, 1), w01)],
            TimeMode::Continuous,
        )
        .unwrap()
    }

    #[test]
    fn derivative_examples() {
        let net = pair(WeightFunction::constant(0.7), WeightFunction::constant(0.2));
        assert_eq!(derivative(&net, &[3.0, 3.0], 1.0), vec![0.0, 0.0]);
        // W_21 = 1 (arc 0 -> 1), W_12 = 0
        let net = pair(WeightFunction::Zero, WeightFunction::constant(1.0));
        assert_eq!(derivative(&net, &[0.0, 1.0], 0.0), vec![0.0, -1.0]);
        let g = Digraph::new(3, [(0, 1)]).unwrap();
        let net = TimeVaryingNetwork::new(
            g,
            [(Arc::new(0, 1), WeightFunction::constant(1.0))],
            TimeMode::Continuous,
        )
        .unwrap();
        assert_eq!(derivative(&net, &[0.0, 1.0, 5.0], 0.0)[2], 0.0);
    }

    #[test]
    fn zero_weights_freeze_state() {
        let net = pair(WeightFunction::Zero, WeightFunction::Zero);
        let traj = integrate(&net, &[0.25, -1.0], 0.0, 3.0, 0.1).unwrap();
        assert!(traj.samples.iter().all(|(_, x)| x == &vec![0.25, -1.0]));
        assert_eq!(traj.samples.last().unwrap().0, 3.0);
    }

    #[test]
    fn symmetric_pair_matches_closed_form() {
        let net = pair(WeightFunction::constant(1.0), WeightFunction::constant(1.0));
        let traj = integrate(&net, &[0.0, 1.0], 0.0, 1.0, 1e-3).unwrap();
        let h = metrics(&traj.samples.last().unwrap().1).unwrap().spread;
        let exact = (-2.0f64).exp();
        assert!(((h - exact) / exact).abs() < 1e-4, "{h} vs {exact}");
    }

    #[test]
    fn harmonic_leader_follower_matches_closed_form() {
        let net = pair(WeightFunction::Zero, WeightFunction::power_decay(1.0, 1.0));
        let traj = integrate(&net, &[0.0, 1.0], 0.0, 9.0, 1e-3).unwrap();
        let x2 = traj.samples.last().unwrap().1[1];
        assert!((x2 - 0.1).abs() < 1e-4, "{x2}");
    }

    #[test]
    fn steps_align_with_pulse_edges_and_samples() {
        let net = pair(
            WeightFunction::pulse(2.0, 0.3, 1.0, 1.0),
            WeightFunction::pulse(2.0, 0.3, 1.0, 1.0),
        );
        let opts = IntegratorOptions::new(0.05).with_sample_interval(0.25);
        let traj = integrate_with(&net, &[0.0, 1.0], 0.0, 2.0, &opts).unwrap();
        let times: Vec<f64> = traj.samples.iter().map(|s| s.0).collect();
        for edge in [0.3, 1.0, 1.3, 0.25, 0.5, 1.75] {
            assert!(times.iter().any(|&t| t == edge), "missing {edge}");
        }
        for rec in &traj.step_records {
            assert!(rec.h * rec.max_xi <= 0.5 + 1e-15);
        }
    }

    #[test]
    fn step_cap_bounds_every_step() {
        let net = pair(WeightFunction::constant(40.0), WeightFunction::constant(10.0));
        let traj = integrate(&net, &[0.0, 1.0], 0.0, 1.0, 1.0).unwrap();
        assert!(traj.step_records.iter().all(|r| r.h * r.max_xi <= 0.5 + 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        let net = pair(WeightFunction::Zero, WeightFunction::Zero);
        assert!(matches!(
            integrate(&net, &[0.0, 1.0], 1.0, 1.0, 0.1),
            Err(DynamicsError::InvalidInterval { .. })
        ));
        assert!(integrate(&net, &[0.0], 0.0, 1.0, 0.1).is_err());
    }
}
