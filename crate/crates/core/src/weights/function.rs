use serde::{Deserialize, Serialize};

use super::{TimeMode, WeightError};

/// Whether an arc keeps influencing its head forever.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Persistence {
    /// Total weight diverges.
    Persistent,
    /// Total weight is finite.
    Vanishing,
}

/// Time-dependent nonnegative arc weight.
///
/// Units are weight per step in discrete mode and weight rate per unit
/// time in continuous mode. Every family has closed-form evaluation and
/// enumerates its own discontinuities, which the continuous integrator
/// never steps across.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightFunction {
    Constant {
        value: f64,
    },
    /// `scale / (1 + t)^exponent`
    PowerDecay {
        scale: f64,
        exponent: f64,
    },
    /// `scale * exp(-rate * t)`
    ExponentialDecay {
        scale: f64,
        rate: f64,
    },
    /// Rectangular pulses of the given height and width. Pulse `k` starts
    /// at `s_k`, with `s_0 = 0` and `s_{k+1} - s_k = period * gap_growth^k`,
    /// so `gap_growth = 1` is an ordinary periodic train.
    PeriodicPulse {
        height: f64,
        width: f64,
        period: f64,
        #[serde(default = "unit_growth")]
        gap_growth: f64,
    },
    /// Piecewise constant and right-continuous: `values[k]` holds on
    /// `[breakpoints[k], breakpoints[k + 1])` and the last value holds
    /// forever. `breakpoints[0]` must be 0. Finite data cannot decide
    /// persistence, so it has to be declared.
    Tabulated {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        persistence: Option<Persistence>,
    },
    Zero,
}

fn unit_growth() -> f64 {
    1.0
}

fn nonneg(name: &'static str, v: f64) -> Result<(), WeightError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(WeightError::InvalidParameter {
            name,
            value: v,
            reason: "must be finite and nonnegative",
        })
    }
}

impl WeightFunction {
    pub fn constant(value: f64) -> Self {
        WeightFunction::Constant { value }
    }

    pub fn power_decay(scale: f64, exponent: f64) -> Self {
        WeightFunction::PowerDecay { scale, exponent }
    }

    pub fn exponential_decay(scale: f64, rate: f64) -> Self {
        WeightFunction::ExponentialDecay { scale, rate }
    }

    pub fn pulse(height: f64, width: f64, period: f64, gap_growth: f64) -> Self {
        WeightFunction::PeriodicPulse {
            height,
            width,
            period,
            gap_growth,
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            WeightFunction::Constant { .. } => "constant",
            WeightFunction::PowerDecay { .. } => "power-decay",
            WeightFunction::ExponentialDecay { .. } => "exponential-decay",
            WeightFunction::PeriodicPulse { .. } => "periodic-pulse",
            WeightFunction::Tabulated { .. } => "tabulated",
            WeightFunction::Zero => "zero",
        }
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        match *self {
            WeightFunction::Constant { value } => nonneg("value", value),
            WeightFunction::PowerDecay { scale, exponent } => {
                nonneg("scale", scale)?;
                nonneg("exponent", exponent)
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                nonneg("scale", scale)?;
                nonneg("rate", rate)
            }
            WeightFunction::PeriodicPulse {
                height,
                width,
                period,
                gap_growth,
            } => {
                nonneg("height", height)?;
                nonneg("width", width)?;
                if !(period.is_finite() && period > 0.0) {
                    return Err(WeightError::InvalidParameter {
                        name: "period",
                        value: period,
                        reason: "must be finite and positive",
                    });
                }
                if width > period {
                    return Err(WeightError::InvalidParameter {
                        name: "width",
                        value: width,
                        reason: "pulses may not overlap (width <= period)",
                    });
                }
                if !(gap_growth.is_finite() && gap_growth >= 1.0) {
                    return Err(WeightError::InvalidParameter {
                        name: "gap_growth",
                        value: gap_growth,
                        reason: "must be finite and >= 1",
                    });
                }
                Ok(())
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                if breakpoints.is_empty() || breakpoints.len() != values.len() {
                    return Err(WeightError::MalformedTable(
                        "breakpoints and values must be nonempty and of equal length",
                    ));
                }
                if breakpoints[0] != 0.0 {
                    return Err(WeightError::MalformedTable("first breakpoint must be 0"));
                }
                if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
                    return Err(WeightError::MalformedTable(
                        "breakpoints must be finite and strictly increasing",
                    ));
                }
                values.iter().try_for_each(|&v| nonneg("values", v))
            }
            WeightFunction::Zero => Ok(()),
        }
    }

    /// Value at `t >= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            WeightFunction::Constant { value } => value,
            WeightFunction::PowerDecay { scale, exponent } => {
                if exponent == 0.0 {
                    scale
                } else {
                    scale * (1.0 + t).powf(-exponent)
                }
            }
            WeightFunction::ExponentialDecay { scale, rate } => scale * (-rate * t).exp(),
            WeightFunction::PeriodicPulse { height, width, .. } => {
                let (_, start) = self.pulse_at(t);
                if t - start < width {
                    height
                } else {
                    0.0
                }
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => values[table_piece(breakpoints, t)],
            WeightFunction::Zero => 0.0,
        }
    }

    /// Left limit at `t`. Equals [`eval`](Self::eval) except at jump points.
    pub fn eval_left(&self, t: f64) -> f64 {
        match *self {
            WeightFunction::PeriodicPulse { height, width, .. } => {
                let (k, start) = self.pulse_at(t);
                let since = t - start;
                if since > 0.0 && since <= width {
                    height
                } else if since == 0.0 && k > 0 {
                    // t sits exactly on a pulse start: look at the previous pulse's tail
                    let prev = self.pulse_start(k - 1);
                    if t - prev <= width {
                        height
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                let k = table_piece(breakpoints, t);
                if k > 0 && breakpoints[k] == t {
                    values[k - 1]
                } else {
                    values[k]
                }
            }
            _ => self.eval(t),
        }
    }

    /// Supremum over `t >= 0`.
    pub fn sup(&self) -> f64 {
        match *self {
            WeightFunction::Constant { value } => value,
            WeightFunction::PowerDecay { scale, .. } => scale,
            WeightFunction::ExponentialDecay { scale, .. } => scale,
            WeightFunction::PeriodicPulse { height, width, .. } => {
                if width > 0.0 {
                    height
                } else {
                    0.0
                }
            }
            WeightFunction::Tabulated { ref values, .. } => {
                values.iter().copied().fold(0.0, f64::max)
            }
            WeightFunction::Zero => 0.0,
        }
    }

    /// True if the function never increases.
    pub fn is_nonincreasing(&self) -> bool {
        match self {
            WeightFunction::PeriodicPulse { height, width, .. } => *height == 0.0 || *width == 0.0,
            WeightFunction::Tabulated { values, .. } => values.windows(2).all(|w| w[1] <= w[0]),
            _ => true,
        }
    }

    fn pulse_start(&self, k: u64) -> f64 {
        match *self {
            WeightFunction::PeriodicPulse {
                period, gap_growth, ..
            } => {
                if gap_growth == 1.0 {
                    k as f64 * period
                } else {
                    period * (gap_growth.powf(k as f64) - 1.0) / (gap_growth - 1.0)
                }
            }
            _ => unreachable!("pulse_start on non-pulse family"),
        }
    }

    /// Index and start of the last pulse starting at or before `t`.
    fn pulse_at(&self, t: f64) -> (u64, f64) {
        let WeightFunction::PeriodicPulse {
            period, gap_growth, ..
        } = *self
        else {
            unreachable!("pulse_at on non-pulse family")
        };
        let mut k = if gap_growth == 1.0 {
            (t / period).floor()
        } else {
            (1.0 + t * (gap_growth - 1.0) / period).ln() / gap_growth.ln()
        }
        .floor()
        .max(0.0) as u64;
        // float rounding can leave k off by one in either direction
        while k > 0 && self.pulse_start(k) > t {
            k -= 1;
        }
        while self.pulse_start(k + 1) <= t {
            k += 1;
        }
        (k, self.pulse_start(k))
    }

    /// `∫_0^x` of a pulse train.
    fn pulse_cumulative(&self, x: f64) -> f64 {
        let WeightFunction::PeriodicPulse { height, width, .. } = *self else {
            unreachable!()
        };
        if x <= 0.0 {
            return 0.0;
        }
        let (k, start) = self.pulse_at(x);
        height * (k as f64 * width + (x - start).min(width))
    }

    /// `Σ_{s=t}^{t+len-1} w(s)`.
    pub fn window_sum(&self, t: u64, len: u64) -> f64 {
        match *self {
            WeightFunction::Zero => 0.0,
            WeightFunction::Constant { value } => value * len as f64,
            WeightFunction::ExponentialDecay { scale, rate } if rate > 0.0 => {
                // geometric series: c e^{-λt} (1 - e^{-λT}) / (1 - e^{-λ})
                scale * (-rate * t as f64).exp() * (-(-rate * len as f64).exp_m1())
                    / (-(-rate).exp_m1())
            }
            _ => (t..t + len).map(|s| self.eval(s as f64)).sum(),
        }
    }

    /// `∫_a^b w(s) ds` in closed form.
    pub fn window_integral(&self, a: f64, b: f64) -> Result<f64, WeightError> {
        if !(a >= 0.0 && a <= b) {
            return Err(WeightError::InvalidInterval { a, b });
        }
        if a == b {
            return Ok(0.0);
        }
        Ok(match *self {
            WeightFunction::Zero => 0.0,
            WeightFunction::Constant { value } => value * (b - a),
            WeightFunction::PowerDecay { scale, exponent } => {
                if exponent == 1.0 {
                    scale * ((b - a) / (1.0 + a)).ln_1p()
                } else {
                    let e = 1.0 - exponent;
                    scale * ((1.0 + b).powf(e) - (1.0 + a).powf(e)) / e
                }
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                if rate == 0.0 {
                    scale * (b - a)
                } else {
                    scale / rate * (-rate * a).exp() * (-(-rate * (b - a)).exp_m1())
                }
            }
            WeightFunction::PeriodicPulse { .. } => {
                self.pulse_cumulative(b) - self.pulse_cumulative(a)
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                let mut total = 0.0;
                let mut k = table_piece(breakpoints, a);
                let mut lo = a;
                loop {
                    let hi = breakpoints.get(k + 1).copied().unwrap_or(f64::INFINITY).min(b);
                    total += values[k] * (hi - lo);
                    if hi >= b {
                        break;
                    }
                    lo = hi;
                    k += 1;
                }
                total
            }
        })
    }

    /// Analytic persistence classification.
    pub fn classify(&self, mode: TimeMode) -> Result<Persistence, WeightError> {
        use Persistence::*;
        Ok(match *self {
            WeightFunction::Zero => Vanishing,
            WeightFunction::Constant { value } => {
                if value > 0.0 {
                    Persistent
                } else {
                    Vanishing
                }
            }
            WeightFunction::PowerDecay { scale, exponent } => {
                if scale > 0.0 && exponent <= 1.0 {
                    Persistent
                } else {
                    Vanishing
                }
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                if scale > 0.0 && rate == 0.0 {
                    Persistent
                } else {
                    Vanishing
                }
            }
            // Every pulse carries the same mass, so the total diverges
            // whatever the gap growth.
            WeightFunction::PeriodicPulse { height, width, .. } => {
                if height * width == 0.0 {
                    Vanishing
                } else if mode == TimeMode::Discrete && width < 1.0 {
                    return Err(WeightError::Unclassifiable(
                        "pulses narrower than one step may contain no sample time",
                    ));
                } else {
                    Persistent
                }
            }
            WeightFunction::Tabulated { persistence, .. } => {
                persistence.ok_or(WeightError::UndeclaredPersistence)?
            }
        })
    }

    /// Jump points of the function in the open interval `(a, b)`, ascending.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        match *self {
            WeightFunction::PeriodicPulse { width, height, .. } if width > 0.0 && height > 0.0 => {
                let mut out = Vec::new();
                let (mut k, _) = self.pulse_at(a.max(0.0));
                loop {
                    let start = self.pulse_start(k);
                    if start >= b {
                        break;
                    }
                    for edge in [start, start + width] {
                        if edge > a && edge < b {
                            out.push(edge);
                        }
                    }
                    k += 1;
                }
                out.dedup();
                out
            }
            WeightFunction::Tabulated {
                ref breakpoints, ..
            } => breakpoints
                .iter()
                .copied()
                .filter(|&p| p > a && p < b)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// `inf_{t >= 0} Σ_{s=t}^{t+len-1} w(s)` over integer `t`, when it has a
    /// closed form or can be found by exhaustive enumeration.
    pub fn window_sum_infimum(&self, len: u64) -> Option<f64> {
        match *self {
            WeightFunction::Zero => Some(0.0),
            WeightFunction::Constant { value } => Some(value * len as f64),
            WeightFunction::PowerDecay { scale, exponent } => {
                Some(if exponent == 0.0 { scale * len as f64 } else { 0.0 })
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                Some(if rate == 0.0 { scale * len as f64 } else { 0.0 })
            }
            WeightFunction::PeriodicPulse {
                period,
                gap_growth,
                width,
                height,
            } => {
                // growing gaps eventually swallow any window
                if gap_growth > 1.0 || width == 0.0 || height == 0.0 {
                    return Some(0.0);
                }
                let integral = period.fract() == 0.0 && period <= 1e6;
                integral.then(|| {
                    (0..period as u64)
                        .map(|t| self.window_sum(t, len))
                        .fold(f64::INFINITY, f64::min)
                })
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                let last = *breakpoints.last().expect("validated table");
                if last > 1e6 {
                    return None;
                }
                let tail = values.last().copied().unwrap_or(0.0) * len as f64;
                Some(
                    (0..=last.ceil() as u64)
                        .map(|t| self.window_sum(t, len))
                        .fold(tail, f64::min),
                )
            }
        }
    }

    /// `inf_{t >= 0} ∫_t^{t+tau} w(s) ds`, when it has a closed form.
    pub fn window_integral_infimum(&self, tau: f64) -> Option<f64> {
        match *self {
            WeightFunction::Zero => Some(0.0),
            WeightFunction::Constant { value } => Some(value * tau),
            WeightFunction::PowerDecay { scale, exponent } => {
                Some(if exponent == 0.0 { scale * tau } else { 0.0 })
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                Some(if rate == 0.0 { scale * tau } else { 0.0 })
            }
            WeightFunction::PeriodicPulse {
                height,
                width,
                period,
                gap_growth,
            } => {
                if gap_growth > 1.0 {
                    return Some(0.0);
                }
                // Whole periods contribute full pulses; the remainder can
                // hide inside the gap of length period - width.
                let q = (tau / period).floor();
                let r = tau - q * period;
                Some(height * (q * width + (r - (period - width)).max(0.0)))
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                // The window integral is piecewise linear in t with kinks where
                // t or t + tau hits a breakpoint, and constant past the table.
                let tail = values.last().copied().unwrap_or(0.0) * tau;
                let candidates = breakpoints
                    .iter()
                    .flat_map(|&p| [p, p - tau])
                    .filter(|&t| t >= 0.0);
                Some(candidates.fold(tail, |acc, t| {
                    acc.min(self.window_integral(t, t + tau).unwrap_or(f64::INFINITY))
                }))
            }
        }
    }

    /// Upper bound on `Σ_{t >= t0} w(t)`; `None` when the sum diverges.
    pub fn tail_sum(&self, t0: u64) -> Option<TailBound> {
        let t0f = t0 as f64;
        match *self {
            WeightFunction::Zero => Some(TailBound::exact(0.0)),
            WeightFunction::Constant { value } => (value == 0.0).then(|| TailBound::exact(0.0)),
            WeightFunction::PowerDecay { scale, exponent } => {
                if scale == 0.0 {
                    Some(TailBound::exact(0.0))
                } else if exponent > 1.0 {
                    // first term plus the integral of the decreasing remainder
                    let first = scale * (1.0 + t0f).powf(-exponent);
                    let rest = scale * (1.0 + t0f).powf(1.0 - exponent) / (exponent - 1.0);
                    Some(TailBound::upper(first + rest))
                } else {
                    None
                }
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                if scale == 0.0 {
                    Some(TailBound::exact(0.0))
                } else if rate > 0.0 {
                    Some(TailBound::exact(
                        scale * (-rate * t0f).exp() / (-(-rate).exp_m1()),
                    ))
                } else {
                    None
                }
            }
            WeightFunction::PeriodicPulse { height, width, .. } => {
                (height * width == 0.0).then(|| TailBound::exact(0.0))
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                if *values.last().expect("validated table") > 0.0 {
                    return None;
                }
                let last = *breakpoints.last().expect("validated table");
                let end = last.ceil() as u64;
                Some(TailBound::exact(if end > t0 {
                    self.window_sum(t0, end - t0)
                } else {
                    0.0
                }))
            }
        }
    }

    /// `∫_{t0}^∞ w(t) dt`; `None` when the integral diverges.
    pub fn tail_integral(&self, t0: f64) -> Option<TailBound> {
        match *self {
            WeightFunction::Zero => Some(TailBound::exact(0.0)),
            WeightFunction::Constant { value } => (value == 0.0).then(|| TailBound::exact(0.0)),
            WeightFunction::PowerDecay { scale, exponent } => {
                if scale == 0.0 {
                    Some(TailBound::exact(0.0))
                } else if exponent > 1.0 {
                    Some(TailBound::exact(
                        scale * (1.0 + t0).powf(1.0 - exponent) / (exponent - 1.0),
                    ))
                } else {
                    None
                }
            }
            WeightFunction::ExponentialDecay { scale, rate } => {
                if scale == 0.0 {
                    Some(TailBound::exact(0.0))
                } else if rate > 0.0 {
                    Some(TailBound::exact(scale / rate * (-rate * t0).exp()))
                } else {
                    None
                }
            }
            WeightFunction::PeriodicPulse { height, width, .. } => {
                (height * width == 0.0).then(|| TailBound::exact(0.0))
            }
            WeightFunction::Tabulated {
                ref breakpoints,
                ref values,
                ..
            } => {
                if *values.last().expect("validated table") > 0.0 {
                    return None;
                }
                let last = *breakpoints.last().expect("validated table");
                Some(TailBound::exact(if last > t0 {
                    self.window_integral(t0, last).unwrap_or(0.0)
                } else {
                    0.0
                }))
            }
        }
    }
}

/// A finite tail total, either exact or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub value: f64,
    pub exact: bool,
}

impl TailBound {
    pub fn exact(value: f64) -> Self {
        TailBound { value, exact: true }
    }

    pub fn upper(value: f64) -> Self {
        TailBound {
            value,
            exact: false,
        }
    }

    pub fn plus(self, other: TailBound) -> Self {
        TailBound {
            value: self.value + other.value,
            exact: self.exact && other.exact,
        }
    }
}

/// Index of the table piece containing `t`.
fn table_piece(breakpoints: &[f64], t: f64) -> usize {
    breakpoints.partition_point(|&p| p <= t).saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_examples() {
        assert_eq!(WeightFunction::constant(0.3).eval(7.0), 0.3);
        assert_eq!(WeightFunction::power_decay(1.0, 1.0).eval(3.0), 0.25);
        assert_eq!(WeightFunction::Zero.eval(12.5), 0.0);
    }

    #[test]
    fn window_sum_examples() {
        assert_relative_eq!(WeightFunction::constant(0.3).window_sum(0, 4), 1.2, epsilon = 1e-15);
        assert_eq!(WeightFunction::power_decay(1.0, 1.0).window_sum(0, 2), 1.5);
        assert_eq!(WeightFunction::Zero.window_sum(17, 40), 0.0);
    }

    #[test]
    fn window_integral_examples() {
        assert_eq!(WeightFunction::constant(2.0).window_integral(0.0, 3.0).unwrap(), 6.0);
        assert_relative_eq!(
            WeightFunction::power_decay(1.0, 1.0).window_integral(0.0, 1.0).unwrap(),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            WeightFunction::exponential_decay(1.0, 1.0).window_integral(0.0, 50.0).unwrap(),
            1.0 - (-50.0f64).exp(),
            max_relative = 1e-15
        );
        assert!(matches!(
            WeightFunction::Zero.window_integral(2.0, 1.0),
            Err(WeightError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let d = TimeMode::Discrete;
        assert_eq!(WeightFunction::power_decay(1.0, 1.0).classify(d).unwrap(), Persistence::Persistent);
        assert_eq!(WeightFunction::power_decay(1.0, 2.0).classify(d).unwrap(), Persistence::Vanishing);
        assert_eq!(
            WeightFunction::pulse(1.0, 1.0, 10.0, 1.0).classify(TimeMode::Continuous).unwrap(),
            Persistence::Persistent
        );
        assert_eq!(
            WeightFunction::pulse(1.0, 1.0, 10.0, 2.0).classify(d).unwrap(),
            Persistence::Persistent
        );
        assert_eq!(WeightFunction::Zero.classify(d).unwrap(), Persistence::Vanishing);
        let table = WeightFunction::Tabulated {
            breakpoints: vec![0.0, 1.0],
            values: vec![1.0, 0.0],
            persistence: None,
        };
        assert_eq!(table.classify(d), Err(WeightError::UndeclaredPersistence));
    }

    #[test]
    fn pulse_geometry() {
        // starts at 0, 4, 12, 28 with width 2
        let w = WeightFunction::pulse(0.5, 2.0, 4.0, 2.0);
        for (t, v) in [(0.0, 0.5), (1.9, 0.5), (2.0, 0.0), (4.0, 0.5), (11.9, 0.0), (12.0, 0.5), (28.5, 0.5)] {
            assert_eq!(w.eval(t), v, "t={t}");
        }
        assert_eq!(w.eval_left(2.0), 0.5);
        assert_eq!(w.eval_left(4.0), 0.0);
        assert_eq!(w.breakpoints(0.0, 13.0), vec![2.0, 4.0, 6.0, 12.0]);
        assert_relative_eq!(w.window_integral(1.0, 13.0).unwrap(), 0.5 * (1.0 + 2.0 + 1.0));
    }

    #[test]
    fn pulse_window_integral_infimum_matches_scan() {
        let w = WeightFunction::pulse(1.0, 1.0, 2.0, 1.0);
        assert_eq!(w.window_integral_infimum(2.0), Some(1.0));
        let w = WeightFunction::pulse(0.7, 0.3, 1.1, 1.0);
        for tau in [0.2, 0.9, 1.0, 2.5, 3.05] {
            let scan = (0..2200)
                .map(|k| {
                    let t = k as f64 * 1e-3;
                    w.window_integral(t, t + tau).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            let inf = w.window_integral_infimum(tau).unwrap();
            assert!(inf <= scan + 1e-12 && scan - inf < 1e-3 * 0.7 + 1e-12, "tau={tau}");
        }
    }

    #[test]
    fn tabulated_behaviour() {
        let w = WeightFunction::Tabulated {
            breakpoints: vec![0.0, 2.0, 5.0],
            values: vec![1.0, 3.0, 0.0],
            persistence: Some(Persistence::Vanishing),
        };
        w.validate().unwrap();
        assert_eq!(w.eval(1.99), 1.0);
        assert_eq!(w.eval(2.0), 3.0);
        assert_eq!(w.eval_left(2.0), 1.0);
        assert_eq!(w.window_integral(1.0, 6.0).unwrap(), 1.0 + 9.0);
        assert_eq!(w.tail_integral(0.0).unwrap().value, 11.0);
        assert_eq!(w.tail_sum(1).unwrap().value, 1.0 + 3.0 * 3.0);
        assert_eq!(w.window_integral_infimum(1.0), Some(0.0));
        assert_eq!(w.breakpoints(0.0, 10.0), vec![2.0, 5.0]);
    }

    #[test]
    fn tail_bounds() {
        let e = WeightFunction::exponential_decay(1.0, 0.5);
        let direct: f64 = (3..2000).map(|t| e.eval(t as f64)).sum();
        assert_relative_eq!(e.tail_sum(3).unwrap().value, direct, max_relative = 1e-12);
        let p = WeightFunction::power_decay(1.0, 2.0);
        let direct: f64 = (0..2_000_000u64).map(|t| p.eval(t as f64)).sum();
        assert!(p.tail_sum(0).unwrap().value >= direct);
        assert!(WeightFunction::power_decay(1.0, 1.0).tail_sum(0).is_none());
        assert!(WeightFunction::constant(0.1).tail_integral(0.0).is_none());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(WeightFunction::constant(-1.0).validate().is_err());
        assert!(WeightFunction::pulse(1.0, 3.0, 2.0, 1.0).validate().is_err());
        assert!(WeightFunction::pulse(1.0, 1.0, 2.0, 0.5).validate().is_err());
        assert!(WeightFunction::power_decay(f64::NAN, 1.0).validate().is_err());
    }
}
