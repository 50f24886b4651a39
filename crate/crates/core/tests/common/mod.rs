//! Independent oracles shared by the property and acceptance tests.
#![allow(dead_code)]

use persistgraph_core::weights::{Persistence, TimeMode};
use persistgraph_core::WeightFunction;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// All-pairs hop distances by Floyd–Warshall on an adjacency matrix.
pub fn all_pairs(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<Option<usize>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(t, h) in arcs {
        if t != h {
            d[t][h] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].map_or(true, |c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Nodes reaching every node, from the distance matrix.
pub fn brute_centers(d: &[Vec<Option<usize>>]) -> Vec<usize> {
    (0..d.len())
        .filter(|&i| d[i].iter().all(Option::is_some))
        .collect()
}

pub fn brute_diameter(d: &[Vec<Option<usize>>]) -> usize {
    d.iter().flatten().flatten().copied().max().unwrap_or(0)
}

pub const HORIZONS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];

/// An increment below this over the last decade counts as converged.
pub const CAUCHY_THRESHOLD: f64 = 1e-6;

/// `w` restated from its parameters, for nondecreasing query times only.
fn sweep_density(w: &WeightFunction) -> Box<dyn FnMut(f64) -> f64> {
    match *w {
        WeightFunction::Zero => Box::new(|_| 0.0),
        WeightFunction::Constant { value } => Box::new(move |_| value),
        WeightFunction::PowerDecay { scale, exponent } => {
            Box::new(move |t| scale / (1.0 + t).powf(exponent))
        }
        WeightFunction::ExponentialDecay { scale, rate } => {
            Box::new(move |t| scale * (-rate * t).exp())
        }
        WeightFunction::PeriodicPulse {
            height,
            width,
            period,
            gap_growth,
        } => {
            // next pulse start and the gap after it, advanced as t sweeps
            let (mut start, mut gap) = (0.0f64, period);
            Box::new(move |t| {
                while start + gap <= t {
                    start += gap;
                    gap *= gap_growth;
                }
                if t >= start && t < start + width {
                    height
                } else {
                    0.0
                }
            })
        }
        WeightFunction::Tabulated { .. } => panic!("tabulated weights have no closed form"),
    }
}

/// Partial totals of `w` up to each horizon: plain sums over integer
/// times in discrete mode, two-point Gauss per unit panel in continuous
/// mode.
pub fn partial_totals(w: &WeightFunction, mode: TimeMode) -> Vec<f64> {
    let mut f = sweep_density(w);
    let offset = 0.5 / 3f64.sqrt();
    let mut totals = Vec::with_capacity(HORIZONS.len());
    let mut acc = 0.0;
    let mut from = 0u64;
    for &h in &HORIZONS {
        for s in from..h {
            let s = s as f64;
            acc += match mode {
                TimeMode::Discrete => f(s),
                TimeMode::Continuous => 0.5 * (f(s + 0.5 - offset) + f(s + 0.5 + offset)),
            };
        }
        totals.push(acc);
        from = h;
    }
    totals
}

/// Numeric verdict: nondecreasing partial totals, and persistent when the
/// last decade still adds at least the Cauchy threshold.
pub fn numeric_persistence(totals: &[f64]) -> Option<Persistence> {
    if totals.windows(2).any(|p| p[1] < p[0]) {
        return None;
    }
    let n = totals.len();
    Some(if totals[n - 1] - totals[n - 2] >= CAUCHY_THRESHOLD {
        Persistence::Persistent
    } else {
        Persistence::Vanishing
    })
}

/// One weight drawn from `family` (0 constant, 1 power decay,
/// 2 exponential decay, 3 pulse train), in the ranges where a numeric
/// verdict at the horizons above is unambiguous.
pub fn draw_weight(rng: &mut ChaCha8Rng, family: usize) -> WeightFunction {
    match family {
        0 => {
            if rng.gen_bool(0.2) {
                WeightFunction::constant(0.0)
            } else {
                WeightFunction::constant(rng.gen_range(0.01..1.0))
            }
        }
        1 => {
            let c = rng.gen_range(0.1..2.0);
            let p = if rng.gen_bool(0.5) {
                rng.gen_range(0.0..=1.0)
            } else {
                rng.gen_range(2.5..4.0)
            };
            WeightFunction::power_decay(c, p)
        }
        2 => {
            let c = rng.gen_range(0.1..2.0);
            let rate = if rng.gen_bool(0.1) {
                0.0
            } else {
                rng.gen_range(0.01..2.0)
            };
            WeightFunction::exponential_decay(c, rate)
        }
        _ => {
            let width = rng.gen_range(1.0..3.0);
            WeightFunction::pulse(
                rng.gen_range(0.01..1.0),
                width,
                width + rng.gen_range(0.0..4.0),
                rng.gen_range(1.0..2.0),
            )
        }
    }
}

pub const FAMILIES: [&str; 4] = ["constant", "power-decay", "exponential-decay", "pulse"];
