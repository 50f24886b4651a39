use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use persistgraph_core::analysis::sigma_star_certificate;
use persistgraph_core::dynamics::{integrate_with, simulate, BeliefVector};
use persistgraph_core::scenario::{random_balanced_network, s1, s3, s5};
use persistgraph_core::weights::{
    check_cut_balance, persistent_graph, theta_profile, CutScope, SubsetSelection, TimeMode,
};

fn graph_metrics(c: &mut Criterion) {
    let net = random_balanced_network(7, 40, 2.0, TimeMode::Discrete);
    c.bench_function("diameter n=40", |b| b.iter(|| black_box(net.graph()).diameter()));
    c.bench_function("classify n=40", |b| b.iter(|| persistent_graph(black_box(&net)).unwrap()));
}

fn dynamics(c: &mut Criterion) {
    let s = s1();
    let net = s.network().unwrap();
    let x0 = vec![0.5, 0.0, 1.0, 0.25, 0.75];
    c.bench_function("discrete S1 10^4 steps", |b| {
        b.iter(|| simulate(&net, BeliefVector::new(0, x0.clone()), 10_000).unwrap())
    });

    let s = s5();
    let net = s.network().unwrap();
    let opts = s.integrator_config().options();
    c.bench_function("continuous S5 [0, 50]", |b| {
        b.iter(|| integrate_with(&net, &[0.0, 1.0, 0.5], 0.0, 50.0, &opts).unwrap())
    });
}

fn certificates(c: &mut Criterion) {
    let net = s3().network().unwrap();
    let report = persistent_graph(&net).unwrap();
    let theta = theta_profile(&net, &report);
    c.bench_function("sigma* certificate", |b| {
        b.iter(|| sigma_star_certificate(black_box(&theta), 0).unwrap())
    });

    let net = random_balanced_network(3, 10, 2.0, TimeMode::Discrete);
    let times: Vec<f64> = (0..20).map(f64::from).collect();
    c.bench_function("cut balance n=10 exhaustive", |b| {
        b.iter(|| {
            check_cut_balance(&net, CutScope::All, 200.0, &times, SubsetSelection::Exhaustive)
                .unwrap()
        })
    });
}

criterion_group!(benches, graph_metrics, dynamics, certificates);
criterion_main!(benches);
