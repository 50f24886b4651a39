use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Minimum `ψ`, maximum `Ψ` and spread `H = Ψ - ψ` of a belief vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementMetrics {
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

pub fn metrics(x: &[f64]) -> Result<AgreementMetrics, AnalysisError> {
    if x.is_empty() {
        return Err(AnalysisError::EmptyState);
    }
    let (min, max) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(AgreementMetrics {
        min,
        max,
        spread: max - min,
    })
}

/// Time-ordered belief samples, discrete or continuous.
pub trait StateSeries {
    fn len(&self) -> usize;
    fn time(&self, k: usize) -> f64;
    fn values(&self, k: usize) -> &[f64];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Metrics of sample `k`. Panics on an empty belief vector, which the
    /// simulators never produce.
    fn metrics_at(&self, k: usize) -> AgreementMetrics {
        metrics(self.values(k)).expect("belief vectors are nonempty")
    }

    fn spreads(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.metrics_at(k).spread).collect()
    }

    fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }
}

/// Largest one-sample rise of `Ψ` and largest one-sample drop of `ψ`;
/// both are zero (up to rounding) for convex-combination dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullDrift {
    pub max_rise: f64,
    pub max_drop: f64,
    /// Sample index where the larger of the two occurs.
    pub worst_index: Option<usize>,
}

impl HullDrift {
    pub fn worst(&self) -> f64 {
        self.max_rise.max(self.max_drop)
    }
}

pub fn hull_drift<S: StateSeries + ?Sized>(series: &S) -> HullDrift {
    let mut drift = HullDrift {
        max_rise: 0.0,
        max_drop: 0.0,
        worst_index: None,
    };
    let mut worst = 0.0;
    for k in 1..series.len() {
        let (a, b) = (series.metrics_at(k - 1), series.metrics_at(k));
        let rise = b.max - a.max;
        let drop = a.min - b.min;
        drift.max_rise = drift.max_rise.max(rise);
        drift.max_drop = drift.max_drop.max(drop);
        if rise.max(drop) > worst {
            worst = rise.max(drop);
            drift.worst_index = Some(k);
        }
    }
    drift
}
