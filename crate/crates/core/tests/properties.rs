mod common;

use std::collections::BTreeSet;

use persistgraph_core::analysis::{
    detect_epsilon_agreement, hull_drift, metrics, verify_convexity_bounds,
    CONTINUOUS_BOUND_TOLERANCE,
};
use persistgraph_core::dynamics::{integrate, simulate, BeliefVector};
use persistgraph_core::scenario::random_balanced_network;
use persistgraph_core::weights::{
    check_arc_balance, check_cut_balance, persistent_graph, BalanceProbe, CutScope,
    SubsetSelection, ThetaProfile,
};
use persistgraph_core::{
    Arc, Digraph, NodeId, TimeMode, TimeVaryingNetwork, Verdict, WeightFunction,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |mask| {
            let arcs = (0..n)
                .flat_map(|t| (0..n).map(move |h| (t, h)))
                .zip(mask)
                .filter(|&((t, h), keep)| keep && t != h)
                .map(|(p, _)| p)
                .collect();
            (n, arcs)
        })
    })
}

/// Any family, with supremum `scale`; pulses at least one step wide.
fn arb_weight(scale: f64) -> BoxedStrategy<WeightFunction> {
    prop_oneof![
        Just(WeightFunction::constant(scale)),
        (0.0..4.0f64).prop_map(move |p| WeightFunction::power_decay(scale, p)),
        (0.0..2.0f64).prop_map(move |r| WeightFunction::exponential_decay(scale, r)),
        (1.0..3.0f64, 0.0..4.0f64, 1.0..2.0f64)
            .prop_map(move |(w, gap, g)| WeightFunction::pulse(scale, w, w + gap, g)),
        Just(WeightFunction::Zero),
    ]
    .boxed()
}

/// A network on a random graph with random weight families. Discrete
/// weights are scaled so incoming totals stay at most one.
fn arb_network(max_n: usize, mode: TimeMode) -> impl Strategy<Value = TimeVaryingNetwork> {
    arb_graph(max_n)
        .prop_filter("needs two nodes", |(n, _)| *n >= 2)
        .prop_flat_map(move |(n, arcs)| {
            let weights: Vec<BoxedStrategy<WeightFunction>> = arcs
                .iter()
                .map(|&(_, h)| {
                    let indegree = arcs.iter().filter(|a| a.1 == h).count() as f64;
                    let cap = match mode {
                        TimeMode::Discrete => 1.0 / indegree,
                        TimeMode::Continuous => 3.0,
                    };
                    (0.05..1.0f64)
                        .prop_flat_map(move |u| arb_weight(cap * u))
                        .boxed()
                })
                .collect();
            (Just((n, arcs)), weights)
        })
        .prop_map(move |((n, arcs), weights)| {
            let g = Digraph::new(n, arcs.iter().copied()).unwrap();
            let pairs = arcs.iter().map(|&(t, h)| Arc::new(t, h)).zip(weights);
            TimeVaryingNetwork::new(g, pairs, mode).unwrap()
        })
}

fn arb_beliefs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..1.0f64, n)
}

fn network_and_beliefs(
    max_n: usize,
    mode: TimeMode,
) -> impl Strategy<Value = (TimeVaryingNetwork, Vec<f64>)> {
    arb_network(max_n, mode).prop_flat_map(|net| {
        let n = net.node_count();
        (Just(net), arb_beliefs(n))
    })
}

proptest! {
    #[test]
    fn centers_match_brute_force((n, arcs) in arb_graph(8)) {
        let g = Digraph::new(n, arcs.iter().copied()).unwrap();
        let d = common::all_pairs(n, &arcs);
        let expected: BTreeSet<NodeId> =
            common::brute_centers(&d).into_iter().map(NodeId).collect();
        prop_assert_eq!(g.centers(), expected.clone());
        prop_assert_eq!(g.is_quasi_strongly_connected(), !expected.is_empty());
    }

    #[test]
    fn strong_connectivity_implies_quasi_strong((n, arcs) in arb_graph(8)) {
        let g = Digraph::new(n, arcs.iter().copied()).unwrap();
        if g.is_strongly_connected() {
            prop_assert!(g.is_quasi_strongly_connected());
            prop_assert_eq!(g.centers().len(), n);
        }
    }

    #[test]
    fn diameter_and_distances_match_all_pairs((n, arcs) in arb_graph(8)) {
        let g = Digraph::new(n, arcs.iter().copied()).unwrap();
        let d = common::all_pairs(n, &arcs);
        prop_assert_eq!(g.diameter(), common::brute_diameter(&d));
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(g.distance(NodeId(i), NodeId(j)).unwrap(), d[i][j]);
            }
        }
    }

    #[test]
    fn reachability_grows_with_arcs(
        (n, arcs) in arb_graph(8),
        extra in (0usize..64, 0usize..64),
    ) {
        let g = Digraph::new(n, arcs.iter().copied()).unwrap();
        let (t, h) = (extra.0 % n, extra.1 % n);
        prop_assume!(t != h);
        let mut more = arcs.clone();
        more.push((t, h));
        let bigger = Digraph::new(n, more).unwrap();
        for i in 0..n {
            let before = g.reachable_set(NodeId(i)).unwrap();
            let after = bigger.reachable_set(NodeId(i)).unwrap();
            prop_assert!(before.is_subset(&after));
        }
    }

    #[test]
    fn window_sums_are_additive(
        w in (0.01..1.0f64).prop_flat_map(arb_weight),
        t in 0u64..10_000,
        a in 0u64..500,
        b in 0u64..500,
    ) {
        let whole = w.window_sum(t, a + b);
        let split = w.window_sum(t, a) + w.window_sum(t + a, b);
        prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1e-300),
            "{} vs {}", whole, split);
    }

    #[test]
    fn window_integrals_are_additive(
        w in (0.01..1.0f64).prop_flat_map(arb_weight),
        a in 0.0..1e4f64,
        l1 in 0.0..300.0f64,
        l2 in 0.0..300.0f64,
    ) {
        let (b, c) = (a + l1, a + l1 + l2);
        let whole = w.window_integral(a, c).unwrap();
        let split = w.window_integral(a, b).unwrap() + w.window_integral(b, c).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(1.0),
            "{} vs {}", whole, split);
    }

    #[test]
    fn persistent_graph_is_idempotent(net in arb_network(6, TimeMode::Discrete)) {
        let report = persistent_graph(&net).unwrap();
        prop_assert_eq!(&persistent_graph(&net).unwrap(), &report);
        let arcs: Vec<Arc> = report.persistent_arcs.iter().copied().collect();
        prop_assert_eq!(report.persistent_graph.arcs(), &arcs[..]);
        let again = TimeVaryingNetwork::new(
            report.persistent_graph.clone(),
            arcs.iter().map(|a| (*a, net.weight(*a).unwrap().clone())),
            TimeMode::Discrete,
        ).unwrap();
        let second = persistent_graph(&again).unwrap();
        prop_assert_eq!(second.persistent_arcs, report.persistent_arcs);
        prop_assert!(second.vanishing_arcs.is_empty());
    }

    #[test]
    fn metrics_match_sorting(x in proptest::collection::vec(-1e6..1e6f64, 1..20)) {
        let m = metrics(&x).unwrap();
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(m.min, sorted[0]);
        prop_assert_eq!(m.max, *sorted.last().unwrap());
        prop_assert_eq!(m.spread, sorted[sorted.len() - 1] - sorted[0]);
    }

    #[test]
    fn discrete_hull_never_grows((net, x0) in network_and_beliefs(6, TimeMode::Discrete)) {
        let traj = simulate(&net, BeliefVector::new(0, x0), 60).unwrap();
        prop_assert!(hull_drift(&traj).worst() <= 1e-14);
    }

    #[test]
    fn discrete_dynamics_commute_with_affine_maps(
        (net, x0) in network_and_beliefs(6, TimeMode::Discrete),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let y0: Vec<f64> = x0.iter().map(|v| a * v + b).collect();
        let x = simulate(&net, BeliefVector::new(0, x0), 40).unwrap();
        let y = simulate(&net, BeliefVector::new(0, y0), 40).unwrap();
        for (xs, ys) in x.states.iter().zip(&y.states) {
            for (xv, yv) in xs.values.iter().zip(&ys.values) {
                prop_assert!((a * xv + b - yv).abs() <= 1e-12, "{} vs {}", a * xv + b, yv);
            }
        }
    }

    #[test]
    fn convexity_bounds_hold((net, x0) in network_and_beliefs(5, TimeMode::Discrete)) {
        let traj = simulate(&net, BeliefVector::new(0, x0), 30).unwrap();
        let report = verify_convexity_bounds(&traj, &net, 8).unwrap();
        prop_assert_ne!(report.verdict, Verdict::Fail, "{:?}", report);
    }

    #[test]
    fn epsilon_estimate_ignores_power_of_two_scaling(
        (net, x0) in network_and_beliefs(5, TimeMode::Discrete),
        k in -8i32..=8,
        horizon in 1u32..6,
    ) {
        let scale = 2f64.powi(k);
        let y0: Vec<f64> = x0.iter().map(|v| v * scale).collect();
        let x = simulate(&net, BeliefVector::new(0, x0), 40).unwrap();
        let y = simulate(&net, BeliefVector::new(0, y0), 40).unwrap();
        prop_assert_eq!(
            detect_epsilon_agreement(&x, horizon as f64).unwrap(),
            detect_epsilon_agreement(&y, horizon as f64).unwrap()
        );
    }

    #[test]
    fn cut_balance_follows_from_arc_balance(
        seed in any::<u64>(),
        n in 2usize..=7,
        a in 1.0..4.0f64,
    ) {
        let net = random_balanced_network(seed, n, a, TimeMode::Discrete);
        let report = persistent_graph(&net).unwrap();
        let times: Vec<f64> = (0..40).map(|t| t as f64).collect();
        let arc = check_arc_balance(&net, &report, a, BalanceProbe::Pointwise(&times)).unwrap();
        prop_assert!(arc.passed());
        let k = a * (n * n) as f64;
        let cut = check_cut_balance(
            &net, CutScope::Persistent(&report), k, &times, SubsetSelection::Exhaustive,
        ).unwrap();
        prop_assert!(cut.passed(), "{:?}", cut.witness);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn continuous_hull_never_grows((net, x0) in network_and_beliefs(5, TimeMode::Continuous)) {
        let traj = integrate(&net, &x0, 0.0, 3.0, 1e-2).unwrap();
        prop_assert!(hull_drift(&traj).worst() <= 1e-9);
    }

    #[test]
    fn continuous_bounds_hold((net, x0) in network_and_beliefs(4, TimeMode::Continuous)) {
        use persistgraph_core::analysis::verify_exponential_bound;
        let traj = integrate(&net, &x0, 0.0, 2.0, 1e-3).unwrap();
        let report = verify_exponential_bound(&traj, &net, 0).unwrap();
        prop_assert!(report.worst_slack >= -CONTINUOUS_BOUND_TOLERANCE, "{:?}", report);
    }
}

fn arb_vanishing() -> impl Strategy<Value = WeightFunction> {
    prop_oneof![
        (0.01..1.0f64, 1.5..4.0f64).prop_map(|(c, p)| WeightFunction::power_decay(c, p)),
        (0.01..1.0f64, 0.05..2.0f64).prop_map(|(c, r)| WeightFunction::exponential_decay(c, r)),
        Just(WeightFunction::Zero),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn theta_is_nonnegative_and_under_its_tail_bound(
        terms in proptest::collection::vec(arb_vanishing(), 1..4),
        probes in proptest::collection::vec(0.0..1e6f64, 20),
    ) {
        let theta = ThetaProfile::new(terms);
        for t in probes {
            prop_assert!(theta.eval(t) >= 0.0);
        }
        let partial: f64 = (0..=1_000_000u64).map(|t| theta.eval(t as f64)).sum();
        let bound = theta.tail_sum(0).unwrap().value;
        prop_assert!(partial <= bound * (1.0 + 1e-12), "{} > {}", partial, bound);
    }

    #[test]
    fn classification_agrees_with_partial_sums(seed in any::<u64>(), family in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::draw_weight(&mut rng, family);
        let totals = common::partial_totals(&w, TimeMode::Discrete);
        prop_assert_eq!(
            common::numeric_persistence(&totals),
            Some(w.classify(TimeMode::Discrete).unwrap()),
            "{:?}: {:?}", w, totals
        );
    }
}
