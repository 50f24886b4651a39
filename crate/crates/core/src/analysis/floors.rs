//! Lower bounds on the spread when the persistent graph is not
//! quasi-strongly connected.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, StateSeries};
use crate::graph::NodeId;
use crate::weights::ThetaProfile;

/// Number of `θ` terms multiplied out explicitly before the tail bound.
pub const PRODUCT_TERMS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FloorKind {
    /// `σ* <= Π_{t >= t0} (1 - θ(t))` and `Σ_{t >= t0} θ(t) <= σ*/2`.
    DiscreteSigma { sigma_star: f64, theta_tail_sum: f64 },
    /// `∫_{t0}^∞ θ = theta_tail_integral`.
    ContinuousTheta { theta_tail_integral: f64 },
}

/// If two disjoint ancestor sets start at `0` and `1` at time `t0`, the
/// spread stays at least `floor` from then on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub kind: FloorKind,
    pub floor: f64,
    pub required_t0: f64,
}

/// Discrete floor `σ*/2` from the smallest admissible `t0 >= t_min`.
///
/// `σ*` is a lower bound on `Π_{t >= T1} (1 - θ(t))`, where from `T1` on
/// every `θ(t) < 1`. The product is multiplied out for at most
/// [`PRODUCT_TERMS`] terms; the rest is bounded by `e^{-2 · tail}` via
/// `ln(1 - x) >= -2x` for `x <= 1/2`. Any `θ(s)` past a cut-off `T` is
/// at most `Σ_{t >= T} θ`, which is how the `x <= 1/2` requirement is
/// checked.
pub fn sigma_star_certificate(
    theta: &ThetaProfile,
    t_min: u64,
) -> Result<LowerBoundCertificate, AnalysisError> {
    let tail = |t: u64| theta.tail_sum(t).map(|b| b.value);
    tail(0).ok_or(AnalysisError::NotSummable)?;
    let cut = t_min.saturating_add(PRODUCT_TERMS);
    let cut_tail = tail(cut).ok_or(AnalysisError::NotSummable)?;
    if cut_tail > 0.5 {
        return Err(AnalysisError::TailTooHeavy { tail: cut_tail });
    }
    let values: Vec<f64> = (t_min..cut).map(|t| theta.eval(t as f64)).collect();
    let first_ok = values
        .iter()
        .rposition(|&v| v >= 1.0)
        .map_or(0, |k| k + 1);
    let t1 = t_min + first_ok as u64;
    // sum of logs rather than a running product to keep precision
    let log_product: f64 = values[first_ok..].iter().map(|&v| (-v).ln_1p()).sum();
    let sigma_star = (log_product - 2.0 * cut_tail).exp();

    let half = sigma_star / 2.0;
    let ok = |t: u64| tail(t).is_some_and(|v| v <= half);
    let t0 = if ok(t1) {
        t1
    } else {
        let mut step = 1u64;
        while !ok(t1.saturating_add(step)) {
            if step > u64::MAX / 4 {
                return Err(AnalysisError::OutOfRegime(
                    "no admissible start time for the floor".into(),
                ));
            }
            step *= 2;
        }
        // ok fails at t1 + step/2 (or t1) and holds at t1 + step
        let (mut bad, mut good) = (t1 + step / 2, t1 + step);
        if step == 1 {
            bad = t1;
        }
        while good - bad > 1 {
            let mid = bad + (good - bad) / 2;
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    Ok(LowerBoundCertificate {
        kind: FloorKind::DiscreteSigma {
            sigma_star,
            theta_tail_sum: tail(t0).expect("summable"),
        },
        floor: half,
        required_t0: t0 as f64,
    })
}

/// Start of a continuous floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FloorStart {
    At(f64),
    /// Earliest `t0 >= not_before` whose floor is at least `1/3`.
    OneThird { not_before: f64 },
}

/// Continuous floor `2 e^{-∫_{t0}^∞ θ} - 1`.
pub fn continuous_floor_certificate(
    theta: &ThetaProfile,
    start: FloorStart,
) -> Result<LowerBoundCertificate, AnalysisError> {
    let tail = |t: f64| theta.tail_integral(t).map(|b| b.value);
    let t0 = match start {
        FloorStart::At(t0) => {
            if !(t0 >= 0.0 && t0.is_finite()) {
                return Err(AnalysisError::InvalidParameter {
                    name: "t0",
                    value: t0,
                    reason: "must be finite and nonnegative",
                });
            }
            t0
        }
        FloorStart::OneThird { not_before } => {
            let ok = |t: f64| tail(t).is_some_and(|v| 2.0 * (-v).exp() - 1.0 >= 1.0 / 3.0);
            tail(not_before).ok_or(AnalysisError::NotIntegrable)?;
            if ok(not_before) {
                not_before
            } else {
                let mut span = 1.0f64.max(not_before);
                while !ok(not_before + span) {
                    span *= 2.0;
                    if span > 1e300 {
                        return Err(AnalysisError::OutOfRegime(
                            "no admissible start time for the floor".into(),
                        ));
                    }
                }
                let (mut bad, mut good) = (not_before, not_before + span);
                for _ in 0..200 {
                    let mid = 0.5 * (bad + good);
                    if mid <= bad || mid >= good {
                        break;
                    }
                    if ok(mid) {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                good
            }
        }
    };
    let integral = tail(t0).ok_or(AnalysisError::NotIntegrable)?;
    let floor = 2.0 * (-integral).exp() - 1.0;
    if floor <= 0.0 {
        return Err(AnalysisError::FloorNotPositive { floor });
    }
    Ok(LowerBoundCertificate {
        kind: FloorKind::ContinuousTheta {
            theta_tail_integral: integral,
        },
        floor,
        required_t0: t0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentExtremes {
    pub t: f64,
    /// `ℓ(t) = max_{i ∈ V_u} x_i(t)`.
    pub lower_max: f64,
    /// `ħ(t) = min_{i ∈ V_w} x_i(t)`.
    pub upper_min: f64,
    /// `ħ(t) - ℓ(t)`, a lower bound on the spread.
    pub gap: f64,
}

pub fn component_extremes<S: StateSeries + ?Sized>(
    series: &S,
    lower_set: &BTreeSet<NodeId>,
    upper_set: &BTreeSet<NodeId>,
) -> Result<Vec<ComponentExtremes>, AnalysisError> {
    if lower_set.is_empty() || upper_set.is_empty() {
        return Err(AnalysisError::EmptyState);
    }
    if !lower_set.is_disjoint(upper_set) {
        return Err(AnalysisError::OverlappingSets);
    }
    if series.is_empty() {
        return Ok(Vec::new());
    }
    let n = series.values(0).len();
    if let Some(bad) = lower_set.iter().chain(upper_set).find(|v| v.0 >= n) {
        return Err(AnalysisError::OutOfRange { t: bad.0 as f64 });
    }
    Ok((0..series.len())
        .map(|k| {
            let x = series.values(k);
            let lower_max = lower_set.iter().map(|v| x[v.0]).fold(f64::NEG_INFINITY, f64::max);
            let upper_min = upper_set.iter().map(|v| x[v.0]).fold(f64::INFINITY, f64::min);
            ComponentExtremes {
                t: series.time(k),
                lower_max,
                upper_min,
                gap: upper_min - lower_max,
            }
        })
        .collect())
}

/// Window-sum level below which a single weak window defeats contraction
/// at rate `epsilon`: `½ · A⁻¹ · (n - 1)⁻¹ · ln(2 / (1 + ε))`.
pub fn window_violation_threshold(
    arc_balance: f64,
    n: usize,
    epsilon: f64,
) -> Result<f64, AnalysisError> {
    if !(arc_balance >= 1.0 && arc_balance.is_finite()) {
        return Err(AnalysisError::InvalidParameter {
            name: "A",
            value: arc_balance,
            reason: "must be >= 1",
        });
    }
    if n < 2 {
        return Err(AnalysisError::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "needs at least two nodes",
        });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AnalysisError::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must lie in (0, 1)",
        });
    }
    Ok(0.5 / arc_balance / (n - 1) as f64 * (2.0 / (1.0 + epsilon)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFunction;

    #[test]
    fn zero_theta_gives_half() {
        let c = sigma_star_certificate(&ThetaProfile::default(), 0).unwrap();
        assert_eq!(c.floor, 0.5);
        assert_eq!(c.required_t0, 0.0);
    }

    #[test]
    fn harmonic_theta_is_rejected() {
        let p = ThetaProfile::new(vec![WeightFunction::power_decay(1.0, 1.0)]);
        assert!(matches!(sigma_star_certificate(&p, 0), Err(AnalysisError::NotSummable)));
        assert!(matches!(
            continuous_floor_certificate(&p, FloorStart::At(0.0)),
            Err(AnalysisError::NotIntegrable)
        ));
    }

    #[test]
    fn geometric_theta() {
        // θ(t) = 2^{-t-2}
        let p = ThetaProfile::new(vec![WeightFunction::exponential_decay(0.25, std::f64::consts::LN_2)]);
        let c = sigma_star_certificate(&p, 0).unwrap();
        let FloorKind::DiscreteSigma { sigma_star, .. } = c.kind else {
            panic!()
        };
        let direct: f64 = (0..200).map(|t| 1.0 - 0.5f64.powi(t + 2)).product();
        assert!((sigma_star - direct).abs() < 1e-12, "{sigma_star} vs {direct}");
        assert_eq!(c.required_t0, 1.0);
    }

    #[test]
    fn continuous_floor_examples() {
        let zero = ThetaProfile::default();
        assert_eq!(continuous_floor_certificate(&zero, FloorStart::At(3.0)).unwrap().floor, 1.0);
        let p = ThetaProfile::new(vec![WeightFunction::exponential_decay(1.0, 1.0)]);
        let c = continuous_floor_certificate(&p, FloorStart::OneThird { not_before: 0.0 }).unwrap();
        assert!(c.floor >= 1.0 / 3.0 && c.floor < 1.0 / 3.0 + 1e-9, "{c:?}");
        assert!(matches!(
            continuous_floor_certificate(
                &ThetaProfile::new(vec![WeightFunction::exponential_decay(5.0, 1.0)]),
                FloorStart::At(0.0)
            ),
            Err(AnalysisError::FloorNotPositive { .. })
        ));
    }

    #[test]
    fn threshold_example() {
        let v = window_violation_threshold(1.0, 3, 0.5).unwrap();
        assert!((v - 0.25 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
    }
}
