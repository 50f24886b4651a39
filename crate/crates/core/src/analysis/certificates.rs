//! Contraction-rate certificates and their empirical verification.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, StateSeries};
use crate::weights::{PersistenceReport, TimeVaryingNetwork, Verdict};

/// Slack on discrete contraction checks; only rounding is expected.
pub const DISCRETE_TOLERANCE: f64 = 1e-12;
/// Slack on continuous contraction checks, covering solver error.
pub const CONTINUOUS_TOLERANCE: f64 = 1e-8;

/// Sample-time matching slack when looking up `t + T0`.
const TIME_MATCH: f64 = 1e-9;

/// Where a certificate's constants come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Discrete sufficiency: self-confidence `eta`, window bound
    /// `(a_star, t_star)`, persistent-graph diameter `d0`.
    Discrete {
        eta: f64,
        a_star: f64,
        t_star: u64,
        d0: usize,
    },
    /// Continuous sufficiency with arc balance constant `arc_balance`.
    Continuous {
        arc_balance: f64,
        n: usize,
        omega0: f64,
        m0: f64,
        a_star: f64,
        tau0: f64,
        d0: usize,
    },
    /// Single node: the spread is identically zero.
    Trivial,
}

/// `H(t + horizon) <= epsilon * H(t)` for every `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub epsilon: f64,
    /// `T0`: steps in discrete mode, time units in continuous mode.
    pub horizon: f64,
    pub provenance: Provenance,
}

impl RateCertificate {
    pub fn tolerance(&self) -> f64 {
        match self.provenance {
            Provenance::Continuous { .. } => CONTINUOUS_TOLERANCE,
            _ => DISCRETE_TOLERANCE,
        }
    }
}

fn param(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), AnalysisError> {
    if ok {
        Ok(())
    } else {
        Err(AnalysisError::InvalidParameter { name, value, reason })
    }
}

/// Discrete rate: `ε = 1 - (η^{d0·T*} / 2) · (a*/T*)^{d0}` with `T0 = d0·T*`.
///
/// Refuses `a*/T* > 1`: the per-step weights in the argument are then
/// larger than one and the convex-combination reading breaks down.
/// A diameter of zero only arises for a single node and yields the
/// trivial certificate.
pub fn discrete_rate_bound(
    eta: f64,
    a_star: f64,
    t_star: u64,
    d0: usize,
) -> Result<RateCertificate, AnalysisError> {
    param("eta", eta, eta > 0.0 && eta < 1.0, "must lie in (0, 1)")?;
    param("a_star", a_star, a_star > 0.0 && a_star.is_finite(), "must be positive")?;
    param("t_star", t_star as f64, t_star >= 1, "must be at least 1")?;
    if a_star / t_star as f64 > 1.0 {
        return Err(AnalysisError::OutOfRegime(format!(
            "a*/T* = {} exceeds 1",
            a_star / t_star as f64
        )));
    }
    if d0 == 0 {
        return Ok(RateCertificate {
            epsilon: 0.0,
            horizon: 1.0,
            provenance: Provenance::Trivial,
        });
    }
    let exponent = (d0 as u64 * t_star) as i32;
    let gain = 0.5 * eta.powi(exponent) * (a_star / t_star as f64).powi(d0 as i32);
    Ok(RateCertificate {
        epsilon: 1.0 - gain,
        horizon: (d0 as u64 * t_star) as f64,
        provenance: Provenance::Discrete {
            eta,
            a_star,
            t_star,
            d0,
        },
    })
}

/// Continuous rate: `ω0 = e^{-∫θ}`, `m0 = (ω0/2)² / ((n-1)A)`,
/// `ε = 1 - m0^{d0}/2`, `T0 = τ0 · ⌈d0 ln 2 / a*⌉`.
///
/// `A = 1` is accepted (all persistent weights equal); the argument only
/// needs `A >= 1`.
pub fn continuous_rate_bound(
    arc_balance: f64,
    n: usize,
    theta_integral: f64,
    a_star: f64,
    tau0: f64,
    d0: usize,
) -> Result<RateCertificate, AnalysisError> {
    param("A", arc_balance, arc_balance >= 1.0 && arc_balance.is_finite(), "must be >= 1")?;
    param("n", n as f64, n >= 2, "needs at least two nodes")?;
    param(
        "theta_integral",
        theta_integral,
        theta_integral >= 0.0 && theta_integral.is_finite(),
        "must be finite and nonnegative",
    )?;
    param("a_star", a_star, a_star > 0.0 && a_star.is_finite(), "must be positive")?;
    param("tau0", tau0, tau0 > 0.0 && tau0.is_finite(), "must be positive")?;
    param("d0", d0 as f64, d0 >= 1, "must be at least 1 for n >= 2")?;
    let omega0 = (-theta_integral).exp();
    let m0 = (omega0 / 2.0).powi(2) / ((n - 1) as f64 * arc_balance);
    let epsilon = 1.0 - m0.powi(d0 as i32) / 2.0;
    // ⌈·⌉ with a little slack so exact multiples are not bumped up by rounding
    let rounds = (d0 as f64 * LN_2 / a_star - 1e-12).ceil().max(1.0);
    Ok(RateCertificate {
        epsilon,
        horizon: tau0 * rounds,
        provenance: Provenance::Continuous {
            arc_balance,
            n,
            omega0,
            m0,
            a_star,
            tau0,
            d0,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub verdict: Verdict,
    pub windows: usize,
    /// Largest `H(t + T0) - ε H(t)`; at most the tolerance on a pass.
    pub worst_margin: f64,
    pub worst_time: Option<f64>,
    /// Largest observed `H(t + T0) / H(t)` over windows with `H(t) > 0`.
    pub max_ratio: f64,
}

/// Index of the latest sample at or before `target` (within matching
/// slack), or `None` if the series ends before `target`.
pub(crate) fn sample_at_or_before(times: &[f64], target: f64) -> Option<usize> {
    let last = *times.last()?;
    if last < target - TIME_MATCH {
        return None;
    }
    let j = times.partition_point(|&s| s <= target + TIME_MATCH);
    j.checked_sub(1)
}

/// Checks `H(t + T0) <= ε H(t) + tol` at every sample `t` whose window
/// fits in the series.
///
/// When `t + T0` falls between samples, the sample just before it is
/// used. The spread never increases, so this only makes the check harder.
pub fn verify_contraction<S: StateSeries + ?Sized>(
    series: &S,
    cert: &RateCertificate,
) -> Result<ContractionReport, AnalysisError> {
    let times = series.times();
    let spreads = series.spreads();
    let tol = cert.tolerance();
    let mut windows = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_time = None;
    let mut max_ratio = 0.0f64;
    for (k, &t) in times.iter().enumerate() {
        let Some(j) = sample_at_or_before(&times, t + cert.horizon) else {
            break;
        };
        windows += 1;
        let margin = spreads[j] - cert.epsilon * spreads[k];
        if spreads[k] > 0.0 {
            max_ratio = max_ratio.max(spreads[j] / spreads[k]);
        }
        if margin > worst_margin {
            worst_margin = margin;
            worst_time = Some(t);
        }
    }
    if windows == 0 {
        return Err(AnalysisError::TooShort {
            needed: cert.horizon,
        });
    }
    Ok(ContractionReport {
        verdict: if worst_margin <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        windows,
        worst_margin,
        worst_time,
        max_ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EpsilonEstimate {
    /// Every window starts at zero spread.
    TrivialAgreement,
    /// Smallest `ε` satisfied by every window; strictly below one.
    Contraction { epsilon: f64, worst_time: f64 },
    /// Some window does not contract.
    NoContraction { sup_ratio: f64, worst_time: f64 },
}

/// Empirical `sup_t H(t + T0) / H(t)`, skipping windows with `H(t) = 0`.
pub fn detect_epsilon_agreement<S: StateSeries + ?Sized>(
    series: &S,
    horizon: f64,
) -> Result<EpsilonEstimate, AnalysisError> {
    param("T0", horizon, horizon > 0.0, "must be positive")?;
    let times = series.times();
    let spreads = series.spreads();
    let mut windows = 0;
    let mut sup: Option<(f64, f64)> = None;
    for (k, &t) in times.iter().enumerate() {
        let Some(j) = sample_at_or_before(&times, t + horizon) else {
            break;
        };
        windows += 1;
        if spreads[k] == 0.0 {
            continue;
        }
        let ratio = spreads[j] / spreads[k];
        if sup.map_or(true, |(r, _)| ratio > r) {
            sup = Some((ratio, t));
        }
    }
    if windows == 0 {
        return Err(AnalysisError::TooShort { needed: horizon });
    }
    Ok(match sup {
        None => EpsilonEstimate::TrivialAgreement,
        Some((r, t)) if r < 1.0 => EpsilonEstimate::Contraction {
            epsilon: r,
            worst_time: t,
        },
        Some((r, t)) => EpsilonEstimate::NoContraction {
            sup_ratio: r,
            worst_time: t,
        },
    })
}

/// Times at which repeated continuous contraction is guaranteed without a
/// uniform window bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementSchedule {
    /// Per-round factor `1 - m0^{d0}/2`.
    pub factor: f64,
    pub m0: f64,
    pub d0: usize,
    /// `t_0 < t_1 < … < t_K`; `H(t_k) <= factor^k · H(t_0)`.
    pub times: Vec<f64>,
}

impl AgreementSchedule {
    pub fn rounds(&self) -> usize {
        self.times.len() - 1
    }

    /// Guaranteed ratio `H(t_k) / H(t_0)` after round `k`.
    pub fn bound_after(&self, k: usize) -> f64 {
        self.factor.powi(k as i32)
    }
}

/// Builds the round times for continuous agreement under pointwise arc
/// balance `A`.
///
/// Each round ends once the smallest persistent weight has accumulated
/// `d0 ln 2`. Arc balance gives `min_e W_e >= W_ref / A` for any
/// persistent reference arc, so round `k + 1` ends no later than the
/// first `t` with `∫_{t_k}^t W_ref >= A d0 ln 2`. Rounds continue until
/// `factor^K <= target_ratio`.
pub fn agreement_schedule(
    net: &TimeVaryingNetwork,
    report: &PersistenceReport,
    arc_balance: f64,
    theta_integral: f64,
    t0: f64,
    target_ratio: f64,
) -> Result<AgreementSchedule, AnalysisError> {
    param("target_ratio", target_ratio, target_ratio > 0.0 && target_ratio < 1.0, "must lie in (0, 1)")?;
    let gp = &report.persistent_graph;
    if !gp.is_quasi_strongly_connected() {
        return Err(AnalysisError::OutOfRegime(
            "persistent graph is not quasi-strongly connected".into(),
        ));
    }
    let n = net.node_count();
    let d0 = gp.diameter();
    // a_star and tau0 do not enter m0 or the factor; any valid values do
    let cert = continuous_rate_bound(arc_balance, n, theta_integral, 1.0, 1.0, d0)?;
    let Provenance::Continuous { m0, .. } = cert.provenance else {
        unreachable!()
    };
    let factor = cert.epsilon;
    let rounds = (target_ratio.ln() / factor.ln()).ceil() as usize;
    let reference = gp
        .arcs()
        .first()
        .and_then(|a| net.weight(*a))
        .expect("quasi-strongly connected graph with n >= 2 has an arc");
    let need = arc_balance * d0 as f64 * LN_2;
    let mut times = vec![t0];
    for _ in 0..rounds {
        let start = *times.last().expect("nonempty");
        times.push(accumulate_until(reference, start, need)?);
    }
    Ok(AgreementSchedule {
        factor,
        m0,
        d0,
        times,
    })
}

/// Smallest `t >= start` with `∫_start^t w >= need`, to bisection precision
/// (the returned `t` always satisfies the inequality).
fn accumulate_until(
    w: &crate::weights::WeightFunction,
    start: f64,
    need: f64,
) -> Result<f64, AnalysisError> {
    let mass = |t: f64| w.window_integral(start, t).map_err(AnalysisError::from);
    let mut span = 1.0f64.max(start);
    let mut hi = start + span;
    while mass(hi)? < need {
        span *= 2.0;
        hi = start + span;
        if !hi.is_finite() || span > 1e300 {
            return Err(AnalysisError::OutOfRegime(
                "reference arc never accumulates the required weight".into(),
            ));
        }
    }
    let mut lo = start;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid)? >= need {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
