//! Empirical checks of the per-node convexity bounds along trajectories.

use serde::{Deserialize, Serialize};

use super::{metrics, AnalysisError, StateSeries};
use crate::dynamics::{ContinuousTrajectory, Trajectory};
use crate::graph::{Arc, NodeId};
use crate::weights::{TimeMode, TimeVaryingNetwork, Verdict};

/// Slack for the discrete bounds (rounding only).
pub const DISCRETE_BOUND_TOLERANCE: f64 = 1e-12;
/// Slack for the continuous bounds (solver and quadrature error).
pub const CONTINUOUS_BOUND_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub verdict: Verdict,
    pub checks: usize,
    /// Smallest distance from a belief to the violated side of its bound;
    /// negative means the bound was crossed.
    pub worst_slack: f64,
    pub witness: Option<String>,
}

impl BoundReport {
    fn new() -> Self {
        BoundReport {
            verdict: Verdict::Vacuous,
            checks: 0,
            worst_slack: f64::INFINITY,
            witness: None,
        }
    }

    fn record(&mut self, slack: f64, witness: impl FnOnce() -> String) {
        self.checks += 1;
        if slack < self.worst_slack {
            self.worst_slack = slack;
            self.witness = Some(witness());
        }
    }

    fn finish(mut self, tol: f64) -> Self {
        if self.checks > 0 {
            self.verdict = if self.worst_slack >= -tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
        }
        self
    }

    /// Combines two reports of the same check.
    pub fn merge(mut self, other: BoundReport) -> Self {
        self.checks += other.checks;
        if other.worst_slack < self.worst_slack {
            self.worst_slack = other.worst_slack;
            self.witness = other.witness;
        }
        self.verdict = match (self.verdict, other.verdict) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Pass, _) | (_, Verdict::Pass) => Verdict::Pass,
            _ => Verdict::Vacuous,
        };
        self
    }
}

/// Slack of `x` against `[μ' P Ψ + (1 - μ' P) ψ, μ P ψ + (1 - μ P) Ψ]`,
/// with `μ = (Ψ - x_start)/H`, `μ' = (x_start - ψ)/H` and `P` the decay
/// factor accumulated since the start.
fn convex_slack(lo: f64, hi: f64, x_start: f64, factor: f64, x: f64) -> f64 {
    let h = hi - lo;
    let mu = (hi - x_start) / h;
    let mu_dual = (x_start - lo) / h;
    let upper = mu * factor * lo + (1.0 - mu * factor) * hi;
    let lower = mu_dual * factor * hi + (1.0 - mu_dual * factor) * lo;
    (upper - x).min(x - lower)
}

fn discrete_index(traj: &Trajectory, t: u64) -> Result<usize, AnalysisError> {
    let k = t
        .checked_sub(traj.t0)
        .map(|k| k as usize)
        .filter(|&k| k < traj.states.len())
        .ok_or(AnalysisError::OutOfRange { t: t as f64 })?;
    Ok(k)
}

/// Discrete bound for node `m` from time `t` over `len` steps:
/// `x_m(t+len) <= μ Π(1 - ξ⁺(s;m)) ψ(t) + (1 - μ Π(1 - ξ⁺(s;m))) Ψ(t)`
/// and its mirror image from below, the product over `s ∈ [t, t+len)`.
pub fn verify_convexity_bound(
    traj: &Trajectory,
    net: &TimeVaryingNetwork,
    m: NodeId,
    t: u64,
    len: u64,
) -> Result<BoundReport, AnalysisError> {
    require_mode(net, TimeMode::Discrete)?;
    let k0 = discrete_index(traj, t)?;
    let k1 = discrete_index(traj, t + len)?;
    let start = &traj.states[k0].values;
    let stats = metrics(start)?;
    let mut report = BoundReport::new();
    if stats.spread > 0.0 {
        let factor: f64 = (t..t + len)
            .map(|s| 1.0 - net.xi_plus(s as f64, m))
            .product();
        let slack = convex_slack(stats.min, stats.max, start[m.0], factor, traj.states[k1].values[m.0]);
        report.record(slack, || format!("node {m}, t = {t}, len = {len}"));
    }
    Ok(report.finish(DISCRETE_BOUND_TOLERANCE))
}

/// The discrete bound for every node, every start time and every window
/// length up to `max_len` that fits in the trajectory.
pub fn verify_convexity_bounds(
    traj: &Trajectory,
    net: &TimeVaryingNetwork,
    max_len: u64,
) -> Result<BoundReport, AnalysisError> {
    require_mode(net, TimeMode::Discrete)?;
    let n = net.node_count();
    let steps = traj.states.len();
    let keep: Vec<Vec<f64>> = (0..steps)
        .map(|k| {
            let s = traj.states[k].time as f64;
            (0..n).map(|i| 1.0 - net.xi_plus(s, NodeId(i))).collect()
        })
        .collect();
    let mut report = BoundReport::new();
    for k0 in 0..steps {
        let start = &traj.states[k0].values;
        let stats = metrics(start)?;
        if stats.spread == 0.0 {
            continue;
        }
        for i in 0..n {
            let mut factor = 1.0;
            for len in 1..=max_len as usize {
                let k1 = k0 + len;
                if k1 >= steps {
                    break;
                }
                factor *= keep[k1 - 1][i];
                let slack =
                    convex_slack(stats.min, stats.max, start[i], factor, traj.states[k1].values[i]);
                report.record(slack, || {
                    format!("node {i}, t = {}, len = {len}", traj.states[k0].time)
                });
            }
        }
    }
    Ok(report.finish(DISCRETE_BOUND_TOLERANCE))
}

/// `∫_a^b ξ⁺(τ; m) dτ`, exact per arc.
fn xi_integral(net: &TimeVaryingNetwork, m: NodeId, a: f64, b: f64) -> Result<f64, AnalysisError> {
    let mut total = 0.0;
    for &(_, k) in net.incoming(m) {
        total += net.weights()[k].window_integral(a, b)?;
    }
    Ok(total)
}

/// Continuous bound for every node from sample `start` onward:
/// the same two-sided bound as in discrete time with decay factor
/// `exp(-∫_s^t ξ⁺(τ; m) dτ)`.
pub fn verify_exponential_bound(
    traj: &ContinuousTrajectory,
    net: &TimeVaryingNetwork,
    start: usize,
) -> Result<BoundReport, AnalysisError> {
    require_mode(net, TimeMode::Continuous)?;
    if start >= traj.len() {
        return Err(AnalysisError::OutOfRange { t: start as f64 });
    }
    let s = traj.time(start);
    let x0 = traj.values(start);
    let stats = metrics(x0)?;
    let mut report = BoundReport::new();
    if stats.spread == 0.0 {
        return Ok(report.finish(CONTINUOUS_BOUND_TOLERANCE));
    }
    for m in 0..net.node_count() {
        let mut accumulated = 0.0;
        for k in start + 1..traj.len() {
            accumulated += xi_integral(net, NodeId(m), traj.time(k - 1), traj.time(k))?;
            let slack = convex_slack(
                stats.min,
                stats.max,
                x0[m],
                (-accumulated).exp(),
                traj.values(k)[m],
            );
            report.record(slack, || format!("node {m}, s = {s}, t = {}", traj.time(k)));
        }
    }
    Ok(report.finish(CONTINUOUS_BOUND_TOLERANCE))
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Two-node influence bound along arc `l → m` between samples `from` and
/// `to`.
///
/// With `μ` the largest value such that
/// `x_l(τ) <= μ ψ(s0) + (1 - μ) Ψ(s0)` at every sample in the range,
/// checks `x_m(t) <= μ I ψ(s0) + (1 - μ I) Ψ(s0)` with
/// `I(t) = ∫_{s0}^t exp(-∫_u^t ξ⁺(τ; m) dτ) W_ml(u) du`, and the mirror
/// bound from below. `I` is advanced sample to sample with the recursion
/// `I(t') = e^{-∫_t^{t'} ξ⁺} I(t) + ∫_t^{t'} …`; each piece uses
/// five-point Gauss–Legendre, and sample intervals never straddle a
/// weight discontinuity.
pub fn verify_influence_bound(
    traj: &ContinuousTrajectory,
    net: &TimeVaryingNetwork,
    arc: Arc,
    from: usize,
    to: usize,
) -> Result<BoundReport, AnalysisError> {
    require_mode(net, TimeMode::Continuous)?;
    if !(from < to && to < traj.len()) {
        return Err(AnalysisError::OutOfRange { t: to as f64 });
    }
    let w = net
        .weight(arc)
        .ok_or(AnalysisError::UnknownArc(arc))?;
    let (l, m) = (arc.tail.0, arc.head);
    let x0 = traj.values(from);
    let stats = metrics(x0)?;
    let mut report = BoundReport::new();
    if stats.spread == 0.0 {
        return Ok(report.finish(CONTINUOUS_BOUND_TOLERANCE));
    }
    let (lo, hi) = (stats.min, stats.max);
    let h = hi - lo;
    let (mut mu_up, mut mu_down) = (f64::INFINITY, f64::INFINITY);
    for k in from..=to {
        let xl = traj.values(k)[l];
        mu_up = mu_up.min((hi - xl) / h);
        mu_down = mu_down.min((xl - lo) / h);
    }
    let mu_up = mu_up.clamp(0.0, 1.0);
    let mu_down = mu_down.clamp(0.0, 1.0);

    let mut influence = 0.0;
    for k in from + 1..=to {
        let (a, b) = (traj.time(k - 1), traj.time(k));
        let decay = (-xi_integral(net, m, a, b)?).exp();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut piece = 0.0;
        for (node, weight) in GAUSS5 {
            let u = mid + half * node;
            // left limit at the right end is immaterial for an interior node
            piece += weight * (-xi_integral(net, m, u, b)?).exp() * w.eval(u);
        }
        influence = decay * influence + half * piece;
        let x = traj.values(k)[m.0];
        let upper = mu_up * influence * lo + (1.0 - mu_up * influence) * hi;
        let lower = mu_down * influence * hi + (1.0 - mu_down * influence) * lo;
        let slack = (upper - x).min(x - lower);
        report.record(slack, || format!("arc {arc}, t = {b}"));
    }
    Ok(report.finish(CONTINUOUS_BOUND_TOLERANCE))
}

fn require_mode(net: &TimeVaryingNetwork, expected: TimeMode) -> Result<(), AnalysisError> {
    if net.mode() == expected {
        Ok(())
    } else {
        Err(AnalysisError::ModeMismatch { expected })
    }
}
