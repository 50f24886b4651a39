//! Scenario files: schema, loading, saving and validation.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::dynamics::IntegratorOptions;
use crate::graph::{Arc, Digraph, NodeId};
use crate::weights::{SelfWeight, TimeMode, TimeVaryingNetwork, WeightFunction};

pub const SCHEMA_VERSION: u32 = 1;

/// Default integrator step when a continuous scenario gives none.
pub const DEFAULT_H_MAX: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub mode: TimeMode,
    pub nodes: usize,
    /// Recorded in the report; drives `random` initial beliefs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub start: StartTime,
    /// Steps (discrete) or time units (continuous) after the start.
    pub horizon: f64,
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    pub arcs: Vec<ArcSpec>,
    /// One entry per node; empty means complement self weights.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub self_weights: Vec<SelfWeight>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateSpec>,
}

/// A fixed start time, or the earliest start certified by the scenario's
/// floor certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartTime {
    At(f64),
    Rule(StartRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartRule {
    Certified,
}

impl Default for StartTime {
    fn default() -> Self {
        StartTime::At(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Values {
        values: Vec<f64>,
    },
    /// `0` on `lower`, `1` on `upper`, `1/2` elsewhere. Missing sets are
    /// taken from two disjoint ancestor sets of the persistent graph.
    ZeroOneSplit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Vec<usize>>,
    },
    /// `0` at `low`, `1` at `high`, `1/2` elsewhere.
    TwoPoint { low: usize, high: usize },
    /// Uniform on `[0, 1)`, seeded by the scenario seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub h_max: f64,
    #[serde(default = "default_xi_cap")]
    pub xi_step_cap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<f64>,
}

fn default_xi_cap() -> f64 {
    0.5
}

impl IntegratorConfig {
    pub fn options(&self) -> IntegratorOptions {
        IntegratorOptions {
            h_max: self.h_max,
            xi_step_cap: self.xi_step_cap,
            sample_interval: self.sample_interval,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Every `stride`-th sample goes to the CSV (the last one always does).
    #[serde(default = "default_stride")]
    pub stride: u64,
}

fn default_stride() -> u64 {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSpec {
    pub tail: usize,
    pub head: usize,
    pub weight: WeightFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    #[default]
    Pass,
    Fail,
}

impl Expect {
    fn is_pass(&self) -> bool {
        *self == Expect::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeKind {
    #[default]
    Pointwise,
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutScopeKind {
    All,
    #[default]
    Persistent,
}

/// An assumption check run before simulating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CheckSpec {
    Stochasticity {
        #[serde(default, skip_serializing_if = "Expect::is_pass")]
        expect: Expect,
    },
    SelfConfidence {
        eta: f64,
        #[serde(default, skip_serializing_if = "Expect::is_pass")]
        expect: Expect,
    },
    ArcBalance {
        bound: f64,
        #[serde(default)]
        probe: ProbeKind,
        /// Interval length for the integral probe.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<f64>,
        #[serde(default, skip_serializing_if = "Expect::is_pass")]
        expect: Expect,
    },
    WindowBound {
        a_star: f64,
        /// `T*` steps (discrete) or `τ0` time units (continuous).
        window: f64,
        #[serde(default, skip_serializing_if = "Expect::is_pass")]
        expect: Expect,
    },
    CutBalance {
        k: f64,
        #[serde(default)]
        scope: CutScopeKind,
        #[serde(default, skip_serializing_if = "Expect::is_pass")]
        expect: Expect,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Stochasticity { .. } => "stochasticity",
            CheckSpec::SelfConfidence { .. } => "self-confidence",
            CheckSpec::ArcBalance { .. } => "arc-balance",
            CheckSpec::WindowBound { .. } => "window-bound",
            CheckSpec::CutBalance { .. } => "cut-balance",
        }
    }

    pub fn expect(&self) -> Expect {
        match *self {
            CheckSpec::Stochasticity { expect }
            | CheckSpec::SelfConfidence { expect, .. }
            | CheckSpec::ArcBalance { expect, .. }
            | CheckSpec::WindowBound { expect, .. }
            | CheckSpec::CutBalance { expect, .. } => expect,
        }
    }
}

/// A property verified on the simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CertificateSpec {
    /// `H(t + d0 T*) <= ε H(t)` with the discrete rate.
    DiscreteRate { eta: f64, a_star: f64, t_star: u64 },
    /// `H(t + T0) <= ε H(t)` with the continuous rate. `theta_integral`
    /// defaults to `∫_0^∞ θ` of the network.
    ContinuousRate {
        arc_balance: f64,
        a_star: f64,
        tau0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_integral: Option<f64>,
    },
    /// `H(t) >= σ*/2` from the certified start on.
    DiscreteFloor,
    /// `H(t) >= 2 e^{-∫θ} - 1` from the start on.
    ContinuousFloor,
    /// Some window of length `window` fails to contract by `epsilon`, and
    /// the persistent weights in that window stay below the threshold.
    WindowViolation {
        epsilon: f64,
        window: u64,
        arc_balance: f64,
    },
    /// Repeated contraction at the scheduled round times reaches
    /// `H(t_K) / H(t_0) < target_ratio`.
    AgreementSchedule {
        arc_balance: f64,
        target_ratio: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_integral: Option<f64>,
    },
    /// Convexity bounds per node along the trajectory.
    LemmaBounds {
        #[serde(default = "default_max_len")]
        max_len: u64,
        #[serde(default = "default_bound_starts")]
        starts: usize,
    },
    /// `Ψ` never rises and `ψ` never falls.
    HullMonotonicity,
}

fn default_max_len() -> u64 {
    10
}

fn default_bound_starts() -> usize {
    8
}

impl CertificateSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CertificateSpec::DiscreteRate { .. } => "discrete-rate",
            CertificateSpec::ContinuousRate { .. } => "continuous-rate",
            CertificateSpec::DiscreteFloor => "discrete-floor",
            CertificateSpec::ContinuousFloor => "continuous-floor",
            CertificateSpec::WindowViolation { .. } => "window-violation",
            CertificateSpec::AgreementSchedule { .. } => "agreement-schedule",
            CertificateSpec::LemmaBounds { .. } => "lemma-bounds",
            CertificateSpec::HullMonotonicity => "hull-monotonicity",
        }
    }

    fn required_mode(&self) -> Option<TimeMode> {
        match self {
            CertificateSpec::DiscreteRate { .. }
            | CertificateSpec::DiscreteFloor
            | CertificateSpec::WindowViolation { .. } => Some(TimeMode::Discrete),
            CertificateSpec::ContinuousRate { .. }
            | CertificateSpec::ContinuousFloor
            | CertificateSpec::AgreementSchedule { .. } => Some(TimeMode::Continuous),
            CertificateSpec::LemmaBounds { .. } | CertificateSpec::HullMonotonicity => None,
        }
    }

    pub(crate) fn is_floor(&self) -> bool {
        matches!(
            self,
            CertificateSpec::DiscreteFloor | CertificateSpec::ContinuousFloor
        )
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

impl Scenario {
    /// Parses and validates TOML text.
    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        toml::to_string(self).map_err(|e| ScenarioError::Serialize(e.to_string()))
    }

    /// Integrator settings, with the default step for continuous mode.
    pub fn integrator_config(&self) -> IntegratorConfig {
        self.integrator.unwrap_or(IntegratorConfig {
            h_max: DEFAULT_H_MAX,
            xi_step_cap: default_xi_cap(),
            sample_interval: None,
        })
    }

    /// Builds the network; validation errors carry the offending field.
    pub fn network(&self) -> Result<TimeVaryingNetwork, ScenarioError> {
        for (i, a) in self.arcs.iter().enumerate() {
            for v in [a.tail, a.head] {
                if v >= self.nodes {
                    return Err(invalid(
                        format!("arcs[{i}]"),
                        format!(
                            "arc ({}->{}) references node {v} but the graph has {} nodes",
                            a.tail, a.head, self.nodes
                        ),
                    ));
                }
            }
            if a.tail == a.head {
                return Err(invalid(format!("arcs[{i}]"), "self-loops are not arcs; use self_weights"));
            }
            a.weight
                .validate()
                .map_err(|e| invalid(format!("arcs[{i}].weight"), e.to_string()))?;
        }
        let mut seen = BTreeSet::new();
        for (i, a) in self.arcs.iter().enumerate() {
            if !seen.insert((a.tail, a.head)) {
                return Err(invalid(
                    format!("arcs[{i}]"),
                    format!("duplicate arc ({}->{})", a.tail, a.head),
                ));
            }
        }
        let graph = Digraph::new(self.nodes, self.arcs.iter().map(|a| (a.tail, a.head)))
            .map_err(|e| invalid("arcs", e.to_string()))?;
        let net = TimeVaryingNetwork::new(
            graph,
            self.arcs
                .iter()
                .map(|a| (Arc::new(a.tail, a.head), a.weight.clone())),
            self.mode,
        )
        .map_err(|e| invalid("arcs", e.to_string()))?;
        if self.self_weights.is_empty() {
            Ok(net)
        } else {
            net.with_self_weights(self.self_weights.clone())
                .map_err(|e| invalid("self_weights", e.to_string()))
        }
    }

    /// Semantic checks beyond what parsing enforces.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if self.nodes == 0 {
            return Err(invalid("nodes", "must be at least 1"));
        }
        let discrete = self.mode == TimeMode::Discrete;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive and finite"));
        }
        if discrete && self.horizon.fract() != 0.0 {
            return Err(invalid("horizon", "must be a whole number of steps in discrete mode"));
        }
        match self.start {
            StartTime::At(t) => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(invalid("start", "must be finite and nonnegative"));
                }
                if discrete && t.fract() != 0.0 {
                    return Err(invalid("start", "must be an integer step in discrete mode"));
                }
            }
            StartTime::Rule(StartRule::Certified) => {
                if !self.certificates.iter().any(CertificateSpec::is_floor) {
                    return Err(invalid(
                        "start",
                        "\"certified\" needs a floor certificate to certify the start",
                    ));
                }
            }
        }
        match (&self.integrator, discrete) {
            (Some(_), true) => {
                return Err(invalid("integrator", "only applies to continuous scenarios"));
            }
            (Some(c), false) => {
                if !(c.h_max > 0.0) {
                    return Err(invalid("integrator.h_max", "must be positive"));
                }
                if !(c.xi_step_cap > 0.0 && c.xi_step_cap <= 0.5) {
                    return Err(invalid("integrator.xi_step_cap", "must lie in (0, 1/2]"));
                }
                if let Some(dt) = c.sample_interval {
                    if !(dt > 0.0 && dt.is_finite()) {
                        return Err(invalid("integrator.sample_interval", "must be positive"));
                    }
                }
            }
            _ => {}
        }
        if self.output.stride == 0 {
            return Err(invalid("output.stride", "must be at least 1"));
        }
        self.validate_initial()?;
        self.network()?;
        for (i, c) in self.checks.iter().enumerate() {
            let field = format!("checks[{i}]");
            match *c {
                CheckSpec::Stochasticity { .. } | CheckSpec::SelfConfidence { .. } if !discrete => {
                    return Err(invalid(field, format!("{} applies to discrete scenarios only", c.name())));
                }
                CheckSpec::SelfConfidence { eta, .. } if !(eta > 0.0 && eta < 1.0) => {
                    return Err(invalid(field + ".eta", "must lie in (0, 1)"));
                }
                CheckSpec::ArcBalance {
                    bound,
                    probe,
                    window,
                    ..
                } => {
                    if !(bound >= 1.0 && bound.is_finite()) {
                        return Err(invalid(field + ".bound", "must be >= 1"));
                    }
                    if probe == ProbeKind::Integral && !window.is_some_and(|w| w > 0.0) {
                        return Err(invalid(field + ".window", "integral probe needs a positive window"));
                    }
                }
                CheckSpec::WindowBound { a_star, window, .. } => {
                    if !(a_star > 0.0) {
                        return Err(invalid(field + ".a_star", "must be positive"));
                    }
                    if !(window > 0.0) || (discrete && window.fract() != 0.0) {
                        return Err(invalid(field + ".window", "must be positive (whole steps in discrete mode)"));
                    }
                }
                CheckSpec::CutBalance { k, .. } if !(k >= 1.0) => {
                    return Err(invalid(field + ".k", "must be >= 1"));
                }
                _ => {}
            }
        }
        for (i, c) in self.certificates.iter().enumerate() {
            if let Some(m) = c.required_mode() {
                if m != self.mode {
                    return Err(invalid(
                        format!("certificates[{i}]"),
                        format!("{} applies to {m} scenarios only", c.name()),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_initial(&self) -> Result<(), ScenarioError> {
        let n = self.nodes;
        let in_range = |field: &str, v: usize| {
            if v < n {
                Ok(())
            } else {
                Err(invalid(
                    format!("initial.{field}"),
                    format!("node {v} does not exist (graph has {n} nodes)"),
                ))
            }
        };
        match &self.initial {
            InitialCondition::Values { values } => {
                if values.len() != n {
                    return Err(invalid(
                        "initial.values",
                        format!("expected {n} values, got {}", values.len()),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("initial.values", "values must be finite"));
                }
            }
            InitialCondition::ZeroOneSplit { lower, upper } => {
                if lower.is_some() != upper.is_some() {
                    return Err(invalid("initial", "give both `lower` and `upper` or neither"));
                }
                if let (Some(lo), Some(hi)) = (lower, upper) {
                    for &v in lo {
                        in_range("lower", v)?;
                    }
                    for &v in hi {
                        in_range("upper", v)?;
                    }
                    let a: BTreeSet<_> = lo.iter().collect();
                    if lo.is_empty() || hi.is_empty() || hi.iter().any(|v| a.contains(v)) {
                        return Err(invalid("initial", "`lower` and `upper` must be nonempty and disjoint"));
                    }
                }
            }
            InitialCondition::TwoPoint { low, high } => {
                in_range("low", *low)?;
                in_range("high", *high)?;
                if low == high {
                    return Err(invalid("initial", "`low` and `high` must differ"));
                }
            }
            InitialCondition::Random => {
                if self.seed.is_none() {
                    return Err(invalid("seed", "random initial beliefs need a seed"));
                }
            }
        }
        Ok(())
    }

    /// Node sets of a zero-one split, resolved against the persistent
    /// graph when not given explicitly.
    pub fn split_sets(
        &self,
        persistent: &Digraph,
    ) -> Result<Option<(BTreeSet<NodeId>, BTreeSet<NodeId>)>, ScenarioError> {
        let InitialCondition::ZeroOneSplit { lower, upper } = &self.initial else {
            return Ok(None);
        };
        match (lower, upper) {
            (Some(lo), Some(hi)) => Ok(Some((
                lo.iter().map(|&v| NodeId(v)).collect(),
                hi.iter().map(|&v| NodeId(v)).collect(),
            ))),
            _ => persistent.disjoint_ancestor_pair().map(Some).ok_or_else(|| {
                invalid(
                    "initial",
                    "persistent graph is quasi-strongly connected; no disjoint ancestor sets",
                )
            }),
        }
    }

    /// Initial beliefs; `seed` overrides the scenario seed.
    pub fn initial_values(
        &self,
        persistent: &Digraph,
        seed: Option<u64>,
    ) -> Result<Vec<f64>, ScenarioError> {
        let n = self.nodes;
        Ok(match &self.initial {
            InitialCondition::Values { values } => values.clone(),
            InitialCondition::ZeroOneSplit { .. } => {
                let (lo, hi) = self.split_sets(persistent)?.expect("zero-one split");
                let mut x = vec![0.5; n];
                for v in lo {
                    x[v.0] = 0.0;
                }
                for v in hi {
                    x[v.0] = 1.0;
                }
                x
            }
            InitialCondition::TwoPoint { low, high } => {
                let mut x = vec![0.5; n];
                x[*low] = 0.0;
                x[*high] = 1.0;
                x
            }
            InitialCondition::Random => {
                use rand::{Rng, SeedableRng};
                let seed = seed.or(self.seed).ok_or_else(|| invalid("seed", "missing"))?;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| rng.gen::<f64>()).collect()
            }
        })
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml_str(&text).map_err(|e| e.in_file(path))
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    std::fs::write(path, s.to_toml_string()?).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
name = "pair"
mode = "discrete"
nodes = 2
horizon = 10
initial = { pattern = "two-point", low = 0, high = 1 }

[[arcs]]
tail = 0
head = 1
weight = { family = "constant", value = 0.5 }
"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.start, StartTime::At(0.0));
        assert_eq!(s.output.stride, 1);
        assert!(s.self_weights.is_empty() && s.checks.is_empty());
        assert_eq!(s.network().unwrap().node_count(), 2);
    }

    #[test]
    fn bad_node_names_the_arc() {
        let text = MINIMAL.replace("nodes = 2", "nodes = 3").replace("head = 1", "head = 5");
        match Scenario::from_toml_str(&text) {
            Err(ScenarioError::Validation { field, message }) => {
                assert_eq!(field, "arcs[0]");
                assert!(message.contains("(0->5)"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_family_lists_supported_ones() {
        let text = MINIMAL.replace("\"constant\"", "\"sawtooth\"");
        match Scenario::from_toml_str(&text) {
            Err(ScenarioError::Parse { message }) => {
                assert!(message.contains("sawtooth"), "{message}");
                assert!(message.contains("power-decay"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = MINIMAL.replace("nodes = 2", "nodes = 2\ncolour = \"red\"");
        assert!(matches!(Scenario::from_toml_str(&text), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn mode_specific_fields_are_checked() {
        let text = MINIMAL.replace("horizon = 10", "horizon = 2.5");
        assert!(matches!(
            Scenario::from_toml_str(&text),
            Err(ScenarioError::Validation { ref field, .. }) if field == "horizon"
        ));
        let text = format!("{MINIMAL}\n[integrator]\nh_max = 0.1\n");
        assert!(matches!(
            Scenario::from_toml_str(&text),
            Err(ScenarioError::Validation { ref field, .. }) if field == "integrator"
        ));
    }
}
