//! Seeded random networks and scenarios.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{
    ArcSpec, CertificateSpec, InitialCondition, IntegratorConfig, OutputConfig, Scenario,
    StartTime, SCHEMA_VERSION,
};
use crate::graph::{Arc, Digraph};
use crate::weights::{TimeMode, TimeVaryingNetwork, WeightFunction};

/// A weight function from a random family whose supremum is `scale`.
fn random_weight(rng: &mut ChaCha8Rng, mode: TimeMode, scale: f64) -> WeightFunction {
    match rng.gen_range(0..4) {
        0 => WeightFunction::constant(scale),
        1 => WeightFunction::power_decay(scale, rng.gen_range(0.0..3.0)),
        2 => WeightFunction::exponential_decay(scale, rng.gen_range(0.01..2.0)),
        _ => {
            let min_width = if mode == TimeMode::Discrete { 1.0 } else { 0.1 };
            let width = rng.gen_range(min_width..3.0);
            let period = width + rng.gen_range(0.0..4.0);
            WeightFunction::pulse(scale, width, period, rng.gen_range(1.0..2.0))
        }
    }
}

/// A random scenario checking hull monotonicity: 2 to 6 nodes, random
/// arcs and weight families, random initial beliefs.
///
/// Discrete weights are scaled so every node's incoming sum stays below
/// one; continuous weights go up to 3.
pub fn random_scenario(seed: u64, mode: TimeMode) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=6);
    let mut pairs = Vec::new();
    for t in 0..n {
        for h in 0..n {
            if t != h && rng.gen_bool(0.4) {
                pairs.push((t, h));
            }
        }
    }
    let mut indegree = vec![0usize; n];
    for &(_, h) in &pairs {
        indegree[h] += 1;
    }
    let arcs = pairs
        .iter()
        .map(|&(tail, head)| {
            let cap = match mode {
                TimeMode::Discrete => 1.0 / indegree[head] as f64,
                TimeMode::Continuous => 3.0,
            };
            let scale = cap * rng.gen_range(0.05..1.0);
            ArcSpec {
                tail,
                head,
                weight: random_weight(&mut rng, mode, scale),
            }
        })
        .collect();
    let (horizon, integrator) = match mode {
        TimeMode::Discrete => (200.0, None),
        TimeMode::Continuous => (
            5.0,
            Some(IntegratorConfig {
                h_max: 1e-2,
                xi_step_cap: 0.5,
                sample_interval: None,
            }),
        ),
    };
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: format!("random-{mode}-{seed}"),
        description: String::new(),
        mode,
        nodes: n,
        seed: Some(seed),
        start: StartTime::At(0.0),
        horizon,
        initial: InitialCondition::Random,
        integrator,
        output: OutputConfig::default(),
        arcs,
        self_weights: Vec::new(),
        checks: Vec::new(),
        certificates: vec![CertificateSpec::HullMonotonicity],
    }
}

/// A strongly connected network whose persistent weights are
/// `c_e · (1 + t)^{-p}` with `c_e ∈ [1, A]` up to a common scale, so arc
/// balance holds with constant `A`.
///
/// A Hamiltonian cycle over a shuffled node order guarantees strong
/// connectivity; each remaining pair is added with probability 0.3.
pub fn random_balanced_network(
    seed: u64,
    n: usize,
    arc_balance: f64,
    mode: TimeMode,
) -> TimeVaryingNetwork {
    assert!(n >= 2 && arc_balance >= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|k| (order[k], order[(k + 1) % n])).collect();
    for t in 0..n {
        for h in 0..n {
            if t != h && !pairs.contains(&(t, h)) && rng.gen_bool(0.3) {
                pairs.push((t, h));
            }
        }
    }
    let max_in = (0..n)
        .map(|h| pairs.iter().filter(|p| p.1 == h).count())
        .max()
        .unwrap_or(1);
    let unit = match mode {
        TimeMode::Discrete => 1.0 / (arc_balance * max_in as f64),
        TimeMode::Continuous => 1.0,
    };
    let p = rng.gen_range(0.0..=1.0);
    let graph = Digraph::new(n, pairs.iter().copied()).expect("valid pairs");
    let weights: Vec<(Arc, WeightFunction)> = pairs
        .iter()
        .map(|&(t, h)| {
            let c = rng.gen_range(1.0..=arc_balance);
            (Arc::new(t, h), WeightFunction::power_decay(unit * c, p))
        })
        .collect();
    TimeVaryingNetwork::new(graph, weights, mode).expect("weights are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_scenarios_validate_and_are_reproducible() {
        for seed in 0..20 {
            for mode in [TimeMode::Discrete, TimeMode::Continuous] {
                let s = random_scenario(seed, mode);
                s.validate().unwrap_or_else(|e| panic!("{seed}: {e}"));
                assert_eq!(s, random_scenario(seed, mode));
            }
        }
    }

    #[test]
    fn balanced_networks_are_strongly_connected() {
        for seed in 0..20 {
            let net = random_balanced_network(seed, 6, 3.0, TimeMode::Discrete);
            assert!(net.graph().is_strongly_connected());
        }
    }
}
