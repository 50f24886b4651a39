//! Built-in scenarios.

use std::f64::consts::LN_2;

use super::config::{
    ArcSpec, CertificateSpec, CheckSpec, CutScopeKind, Expect, InitialCondition,
    IntegratorConfig, OutputConfig, ProbeKind, Scenario, StartRule, StartTime, SCHEMA_VERSION,
};
use crate::weights::{TimeMode, WeightFunction};

fn arc(tail: usize, head: usize, weight: WeightFunction) -> ArcSpec {
    ArcSpec { tail, head, weight }
}

fn out_star(n: usize, w: WeightFunction) -> Vec<ArcSpec> {
    (1..n).map(|i| arc(0, i, w.clone())).collect()
}

fn base(name: &str, description: &str, mode: TimeMode, nodes: usize, horizon: f64) -> Scenario {
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        description: description.to_string(),
        mode,
        nodes,
        seed: None,
        start: StartTime::At(0.0),
        horizon,
        initial: InitialCondition::TwoPoint { low: 0, high: 1 },
        integrator: None,
        output: OutputConfig::default(),
        arcs: Vec::new(),
        self_weights: Vec::new(),
        checks: Vec::new(),
        certificates: Vec::new(),
    }
}

fn balance(bound: f64) -> CheckSpec {
    CheckSpec::ArcBalance {
        bound,
        probe: ProbeKind::Pointwise,
        window: None,
        expect: Expect::Pass,
    }
}

fn lemma_bounds(starts: usize) -> CertificateSpec {
    CertificateSpec::LemmaBounds { max_len: 10, starts }
}

/// Discrete contraction: out-star with constant weights.
pub fn s1() -> Scenario {
    let mut s = base(
        "S1",
        "discrete out-star, constant weights: contraction at the certified rate",
        TimeMode::Discrete,
        5,
        10_000.0,
    );
    s.initial = InitialCondition::Values {
        values: vec![0.5, 0.0, 1.0, 0.25, 0.75],
    };
    s.arcs = out_star(5, WeightFunction::constant(0.2));
    s.checks = vec![
        CheckSpec::Stochasticity { expect: Expect::Pass },
        CheckSpec::SelfConfidence {
            eta: 0.2,
            expect: Expect::Pass,
        },
        CheckSpec::WindowBound {
            a_star: 0.2,
            window: 1.0,
            expect: Expect::Pass,
        },
        balance(1.0),
    ];
    s.certificates = vec![
        CertificateSpec::DiscreteRate {
            eta: 0.2,
            a_star: 0.2,
            t_star: 1,
        },
        lemma_bounds(0),
        CertificateSpec::HullMonotonicity,
    ];
    s
}

/// Pulses spaced further and further apart: every arc is persistent, but
/// some window of 100 steps carries almost no weight.
pub fn s2() -> Scenario {
    let mut s = base(
        "S2",
        "discrete cycle with sparser and sparser pulses: a window that fails to contract",
        TimeMode::Discrete,
        3,
        100.0,
    );
    // pulses start at 0, 4, 12, 28, 60, 124, 252; step 125 is the last
    // active step before a gap longer than the window
    s.start = StartTime::At(125.0);
    let pulse = WeightFunction::pulse(0.05, 2.0, 4.0, 2.0);
    s.arcs = vec![arc(0, 1, pulse.clone()), arc(1, 2, pulse.clone()), arc(2, 0, pulse)];
    s.checks = vec![
        CheckSpec::Stochasticity { expect: Expect::Pass },
        balance(1.0),
        CheckSpec::WindowBound {
            a_star: 0.07,
            window: 100.0,
            expect: Expect::Fail,
        },
    ];
    s.certificates = vec![
        CertificateSpec::WindowViolation {
            epsilon: 0.5,
            window: 100,
            arc_balance: 1.0,
        },
        lemma_bounds(0),
        CertificateSpec::HullMonotonicity,
    ];
    s
}

fn two_blocks() -> Vec<ArcSpec> {
    let strong = WeightFunction::constant(0.3);
    let cross = WeightFunction::exponential_decay(0.2, 0.5);
    vec![
        arc(0, 1, strong.clone()),
        arc(1, 0, strong.clone()),
        arc(2, 3, strong.clone()),
        arc(3, 2, strong),
        arc(1, 2, cross.clone()),
        arc(3, 0, cross),
    ]
}

/// Two blocks joined only by decaying arcs: the spread stays above a floor.
pub fn s3() -> Scenario {
    let mut s = base(
        "S3",
        "two blocks joined by summable cross arcs, discrete: no agreement",
        TimeMode::Discrete,
        4,
        10_000.0,
    );
    s.start = StartTime::Rule(StartRule::Certified);
    s.initial = InitialCondition::ZeroOneSplit {
        lower: None,
        upper: None,
    };
    s.arcs = two_blocks();
    s.checks = vec![CheckSpec::Stochasticity { expect: Expect::Pass }];
    s.certificates = vec![
        CertificateSpec::DiscreteFloor,
        lemma_bounds(0),
        CertificateSpec::HullMonotonicity,
    ];
    s
}

/// Continuous counterpart of [`s3`].
pub fn s3c() -> Scenario {
    let mut s = base(
        "S3c",
        "two blocks joined by integrable cross arcs, continuous: no agreement",
        TimeMode::Continuous,
        4,
        100.0,
    );
    s.start = StartTime::Rule(StartRule::Certified);
    s.initial = InitialCondition::ZeroOneSplit {
        lower: None,
        upper: None,
    };
    s.arcs = two_blocks();
    s.integrator = Some(IntegratorConfig {
        h_max: 1e-3,
        xi_step_cap: 0.5,
        sample_interval: None,
    });
    s.output.stride = 100;
    s.checks = vec![balance(1.0)];
    s.certificates = vec![
        CertificateSpec::ContinuousFloor,
        lemma_bounds(4),
        CertificateSpec::HullMonotonicity,
    ];
    s
}

/// Harmonic weights: no uniform window bound, yet repeated contraction.
pub fn s4() -> Scenario {
    let mut s = base(
        "S4",
        "continuous out-star with harmonic weights: agreement without a window bound",
        TimeMode::Continuous,
        3,
        5e21,
    );
    s.arcs = out_star(3, WeightFunction::power_decay(1.0, 1.0));
    // steps grow with t; the cap keeps each one a small fraction of 1/ξ⁺
    s.integrator = Some(IntegratorConfig {
        h_max: 1e30,
        xi_step_cap: 0.02,
        sample_interval: None,
    });
    s.output.stride = 10;
    s.checks = vec![
        balance(1.0),
        CheckSpec::WindowBound {
            a_star: 0.01,
            window: 1.0,
            expect: Expect::Fail,
        },
    ];
    s.certificates = vec![
        CertificateSpec::AgreementSchedule {
            arc_balance: 1.0,
            target_ratio: 0.01,
            theta_integral: None,
        },
        lemma_bounds(4),
        CertificateSpec::HullMonotonicity,
    ];
    s
}

/// Continuous contraction at the certified rate.
pub fn s5() -> Scenario {
    let mut s = base(
        "S5",
        "continuous out-star, constant weights: contraction at the certified rate",
        TimeMode::Continuous,
        3,
        50.0,
    );
    s.arcs = out_star(3, WeightFunction::constant(1.0));
    s.integrator = Some(IntegratorConfig {
        h_max: 1e-3,
        xi_step_cap: 0.5,
        sample_interval: Some(LN_2 / 64.0),
    });
    s.output.stride = 64;
    s.checks = vec![
        balance(1.0),
        CheckSpec::WindowBound {
            a_star: LN_2,
            window: LN_2,
            expect: Expect::Pass,
        },
    ];
    s.certificates = vec![
        CertificateSpec::ContinuousRate {
            arc_balance: 1.0,
            a_star: LN_2,
            tau0: LN_2,
            theta_integral: None,
        },
        lemma_bounds(4),
        CertificateSpec::HullMonotonicity,
    ];
    s
}

/// Out-star: arc balance holds, cut balance cannot (nothing enters the
/// center), and agreement still happens.
pub fn s6() -> Scenario {
    let mut s = base(
        "S6",
        "discrete out-star: arc balance holds, cut balance fails, agreement still certified",
        TimeMode::Discrete,
        4,
        1000.0,
    );
    s.initial = InitialCondition::Values {
        values: vec![0.0, 1.0, 0.5, 0.25],
    };
    s.arcs = out_star(4, WeightFunction::constant(0.25));
    s.checks = vec![
        CheckSpec::Stochasticity { expect: Expect::Pass },
        CheckSpec::SelfConfidence {
            eta: 0.75,
            expect: Expect::Pass,
        },
        balance(1.0),
        CheckSpec::WindowBound {
            a_star: 0.25,
            window: 1.0,
            expect: Expect::Pass,
        },
        CheckSpec::CutBalance {
            k: 1e6,
            scope: CutScopeKind::Persistent,
            expect: Expect::Fail,
        },
    ];
    s.certificates = vec![
        CertificateSpec::DiscreteRate {
            eta: 0.75,
            a_star: 0.25,
            t_star: 1,
        },
        CertificateSpec::HullMonotonicity,
    ];
    s
}

pub fn catalog() -> Vec<Scenario> {
    vec![s1(), s2(), s3(), s3c(), s4(), s5(), s6()]
}

pub fn find(name: &str) -> Option<Scenario> {
    catalog().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries_validate_and_round_trip() {
        for s in catalog() {
            s.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            let text = s.to_toml_string().unwrap();
            let back = Scenario::from_toml_str(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", s.name));
            assert_eq!(back, s);
        }
    }

    #[test]
    fn names_are_unique() {
        let names: std::collections::BTreeSet<_> = catalog().into_iter().map(|s| s.name).collect();
        assert_eq!(names.len(), 7);
        assert!(find("s3c").is_some());
    }
}
