//! Assumption checkers. Each one reports; none of them alters the
//! network or refuses to simulate it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PersistenceReport, TimeMode, TimeVaryingNetwork, WeightError};
use crate::graph::{Arc, NodeId};

/// Absolute tolerance on discrete row sums. Weights are built
/// analytically, so only rounding error is expected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Relative slack for ratio comparisons against a declared constant.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Nothing to check (for example no persistent arcs).
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub location: String,
    /// `None` when the witness is an analytic infimum rather than a sample.
    pub t: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    /// The statistic compared against the threshold (max residual, min
    /// weight, max ratio, ...).
    pub worst_value: f64,
    pub samples: usize,
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    fn vacuous(check: &str, note: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            verdict: Verdict::Vacuous,
            worst_value: 0.0,
            samples: 0,
            witness: None,
            note: Some(note.to_string()),
        }
    }
}

fn require_discrete(net: &TimeVaryingNetwork) -> Result<(), WeightError> {
    if net.mode() == TimeMode::Discrete {
        Ok(())
    } else {
        Err(WeightError::ModeMismatch {
            expected: TimeMode::Discrete,
        })
    }
}

/// Row-sum check: self weight plus incoming weights equals one.
pub fn check_stochasticity(
    net: &TimeVaryingNetwork,
    times: &[u64],
) -> Result<CheckReport, WeightError> {
    require_discrete(net)?;
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut samples = 0;
    for &t in times {
        let tf = t as f64;
        for i in 0..net.node_count() {
            let own = net.self_weight(tf, NodeId(i));
            let mut residual = (own + net.xi_plus(tf, NodeId(i)) - 1.0).abs();
            if own < 0.0 {
                // a negative self weight is not a stochastic row either
                residual = residual.max(-own);
            }
            samples += 1;
            if residual > worst || witness.is_none() {
                worst = worst.max(residual);
                witness = Some(Witness {
                    location: format!("node {i}"),
                    t: Some(tf),
                    value: residual,
                });
            }
        }
    }
    Ok(CheckReport {
        check: "stochasticity".into(),
        verdict: if worst <= ROW_SUM_TOLERANCE {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        worst_value: worst,
        samples,
        witness,
        note: None,
    })
}

/// Self weights bounded below by `eta` at every sampled time.
pub fn check_self_confidence(
    net: &TimeVaryingNetwork,
    eta: f64,
    times: &[u64],
) -> Result<CheckReport, WeightError> {
    require_discrete(net)?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(WeightError::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "must lie in (0, 1)",
        });
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut samples = 0;
    for &t in times {
        for i in 0..net.node_count() {
            let v = net.self_weight(t as f64, NodeId(i));
            samples += 1;
            if v < worst {
                worst = v;
                witness = Some(Witness {
                    location: format!("node {i}"),
                    t: Some(t as f64),
                    value: v,
                });
            }
        }
    }
    Ok(CheckReport {
        check: "self-confidence".into(),
        verdict: if worst >= eta { Verdict::Pass } else { Verdict::Fail },
        worst_value: worst,
        samples,
        witness,
        note: None,
    })
}

/// Where arc balance is compared.
#[derive(Debug, Clone, Copy)]
pub enum BalanceProbe<'a> {
    /// Weight values at sampled times.
    Pointwise(&'a [f64]),
    /// Weight integrals over the given intervals.
    Integral(&'a [(f64, f64)]),
}

/// Every pair of persistent arcs stays within a factor `a` of each other.
///
/// Checking `max / min <= a` over the persistent arcs is the same as
/// checking every ordered pair. A zero next to a positive value fails.
pub fn check_arc_balance(
    net: &TimeVaryingNetwork,
    report: &PersistenceReport,
    a: f64,
    probe: BalanceProbe<'_>,
) -> Result<CheckReport, WeightError> {
    if !(a >= 1.0 && a.is_finite()) {
        return Err(WeightError::InvalidParameter {
            name: "A",
            value: a,
            reason: "must be finite and >= 1",
        });
    }
    let name = match probe {
        BalanceProbe::Pointwise(_) => "arc-balance",
        BalanceProbe::Integral(_) => "integral-arc-balance",
    };
    let arcs: Vec<(Arc, usize)> = net
        .graph()
        .arcs()
        .iter()
        .enumerate()
        .filter(|(_, a)| report.is_persistent(**a))
        .map(|(k, a)| (*a, k))
        .collect();
    if arcs.is_empty() {
        return Ok(CheckReport::vacuous(name, "no persistent arcs"));
    }
    let probes: Vec<(Option<f64>, String, Vec<f64>)> = match probe {
        BalanceProbe::Pointwise(times) => times
            .iter()
            .map(|&t| {
                let vals = arcs.iter().map(|&(_, k)| net.weights()[k].eval(t)).collect();
                (Some(t), String::new(), vals)
            })
            .collect(),
        BalanceProbe::Integral(intervals) => intervals
            .iter()
            .map(|&(lo, hi)| {
                let vals = arcs
                    .iter()
                    .map(|&(_, k)| net.weights()[k].window_integral(lo, hi))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((Some(lo), format!(" over [{lo}, {hi}]"), vals))
            })
            .collect::<Result<_, WeightError>>()?,
    };
    let mut worst = 1.0f64;
    let mut witness = None;
    for (t, label, vals) in &probes {
        let (kmin, lo) = argmin(vals);
        let (kmax, hi) = argmax(vals);
        let ratio = if hi == 0.0 {
            1.0
        } else if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        };
        if ratio > worst || witness.is_none() {
            worst = worst.max(ratio);
            witness = Some(Witness {
                location: format!("{} vs {}{label}", arcs[kmax].0, arcs[kmin].0),
                t: *t,
                value: ratio,
            });
        }
    }
    Ok(CheckReport {
        check: name.into(),
        verdict: if worst <= a * (1.0 + RATIO_SLACK) {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        worst_value: worst,
        samples: probes.len(),
        witness,
        note: None,
    })
}

fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, x)| if x < acc.1 { (k, x) } else { acc })
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, x)| if x > acc.1 { (k, x) } else { acc })
}

/// Window length for the uniform window lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// `T*` consecutive steps `t, …, t + T* - 1`.
    Steps(u64),
    /// Integral over `[t, t + τ₀]`.
    Duration(f64),
}

/// Every persistent arc accumulates at least `a_star` over every window.
///
/// Sampled window starts are checked directly; where a family has a
/// closed-form infimum over all starts, that is checked as well.
pub fn check_window_bound(
    net: &TimeVaryingNetwork,
    report: &PersistenceReport,
    a_star: f64,
    window: Window,
    starts: &[f64],
) -> Result<CheckReport, WeightError> {
    let needed = match window {
        Window::Steps(len) => {
            if len == 0 {
                return Err(WeightError::InvalidParameter {
                    name: "T*",
                    value: 0.0,
                    reason: "must be at least 1",
                });
            }
            TimeMode::Discrete
        }
        Window::Duration(tau) => {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(WeightError::InvalidParameter {
                    name: "tau0",
                    value: tau,
                    reason: "must be finite and positive",
                });
            }
            TimeMode::Continuous
        }
    };
    if net.mode() != needed {
        return Err(WeightError::ModeMismatch { expected: needed });
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut samples = 0;
    let mut consider = |value: f64, arc: Arc, t: Option<f64>| {
        if value < worst {
            worst = value;
            witness = Some(Witness {
                location: format!("arc {arc}"),
                t,
                value,
            });
        }
    };
    let mut any = false;
    for (arc, w) in net.graph().arcs().iter().zip(net.weights()) {
        if !report.is_persistent(*arc) {
            continue;
        }
        any = true;
        for &t in starts {
            let v = match window {
                Window::Steps(len) => w.window_sum(t.max(0.0) as u64, len),
                Window::Duration(tau) => w.window_integral(t, t + tau)?,
            };
            samples += 1;
            consider(v, *arc, Some(t));
        }
        let inf = match window {
            Window::Steps(len) => w.window_sum_infimum(len),
            Window::Duration(tau) => w.window_integral_infimum(tau),
        };
        if let Some(v) = inf {
            consider(v, *arc, None);
        }
    }
    if !any {
        return Ok(CheckReport::vacuous("window-bound", "no persistent arcs"));
    }
    Ok(CheckReport {
        check: "window-bound".into(),
        verdict: if worst >= a_star - ROW_SUM_TOLERANCE {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        worst_value: worst,
        samples,
        witness,
        note: None,
    })
}

/// Which arcs enter the cut sums.
#[derive(Debug, Clone, Copy)]
pub enum CutScope<'a> {
    All,
    Persistent(&'a PersistenceReport),
}

/// Which node subsets are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetSelection {
    /// Every nonempty proper subset; only allowed for `n <= 12`.
    Exhaustive,
    Random { seed: u64, count: usize },
}

impl SubsetSelection {
    /// Exhaustive for small graphs, otherwise `count` seeded samples.
    pub fn auto(n: usize, seed: u64, count: usize) -> Self {
        if n <= 12 {
            SubsetSelection::Exhaustive
        } else {
            SubsetSelection::Random { seed, count }
        }
    }
}

/// Cut balance: for every checked subset `S` and time, the weight
/// entering `S` and the weight leaving `S` are within a factor `k`.
///
/// `worst_value` is the smallest constant that would have passed.
pub fn check_cut_balance(
    net: &TimeVaryingNetwork,
    scope: CutScope<'_>,
    k: f64,
    times: &[f64],
    selection: SubsetSelection,
) -> Result<CheckReport, WeightError> {
    let n = net.node_count();
    if !(k >= 1.0) {
        return Err(WeightError::InvalidParameter {
            name: "K",
            value: k,
            reason: "must be >= 1",
        });
    }
    if n < 2 {
        return Ok(CheckReport::vacuous("cut-balance", "no nonempty proper subsets"));
    }
    let masks: Vec<Vec<bool>> = match selection {
        SubsetSelection::Exhaustive => {
            if n > 12 {
                return Err(WeightError::InvalidParameter {
                    name: "n",
                    value: n as f64,
                    reason: "exhaustive cut enumeration is limited to n <= 12",
                });
            }
            (1u32..(1u32 << n) - 1)
                .map(|m| (0..n).map(|i| m & (1 << i) != 0).collect())
                .collect()
        }
        SubsetSelection::Random { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| loop {
                    let s: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
                    let size = s.iter().filter(|&&b| b).count();
                    if size > 0 && size < n {
                        break s;
                    }
                })
                .collect()
        }
    };
    let arcs: Vec<(Arc, usize)> = net
        .graph()
        .arcs()
        .iter()
        .enumerate()
        .filter(|(_, a)| match scope {
            CutScope::All => true,
            CutScope::Persistent(r) => r.is_persistent(**a),
        })
        .map(|(i, a)| (*a, i))
        .collect();
    let mut worst = 1.0f64;
    let mut witness = None;
    let mut samples = 0;
    for &t in times {
        let vals: Vec<f64> = arcs.iter().map(|&(_, i)| net.weights()[i].eval(t)).collect();
        for s in &masks {
            let (mut inflow, mut outflow) = (0.0, 0.0);
            for (&(a, _), v) in arcs.iter().zip(&vals) {
                match (s[a.tail.0], s[a.head.0]) {
                    (false, true) => inflow += v,
                    (true, false) => outflow += v,
                    _ => {}
                }
            }
            samples += 1;
            let ratio = if inflow == 0.0 && outflow == 0.0 {
                1.0
            } else if inflow == 0.0 || outflow == 0.0 {
                f64::INFINITY
            } else {
                (inflow / outflow).max(outflow / inflow)
            };
            if ratio > worst || witness.is_none() {
                worst = worst.max(ratio);
                let members: Vec<String> = (0..n).filter(|&i| s[i]).map(|i| i.to_string()).collect();
                witness = Some(Witness {
                    location: format!("S = {{{}}} (in {inflow}, out {outflow})", members.join(",")),
                    t: Some(t),
                    value: ratio,
                });
            }
        }
    }
    Ok(CheckReport {
        check: "cut-balance".into(),
        verdict: if worst <= k * (1.0 + RATIO_SLACK) {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        worst_value: worst,
        samples,
        witness,
        note: None,
    })
}
