//! Run reports: a text rendering and a JSON twin with the same content.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::config::Expect;
use super::ScenarioError;
use crate::graph::{Arc, NodeId};
use crate::weights::{TimeMode, Verdict};

/// An `f64` that survives JSON even when infinite or NaN (written as the
/// strings `"inf"`, `"-inf"`, `"nan"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Real(v)),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(Real(f64::INFINITY)),
                "-inf" => Ok(Real(f64::NEG_INFINITY)),
                "nan" => Ok(Real(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_finite() && self.0 != 0.0 && (self.0.abs() < 1e-4 || self.0.abs() >= 1e6) {
            write!(f, "{:.6e}", self.0)
        } else if self.0.is_finite() {
            write!(f, "{:.6}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Result of one check or certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub name: String,
    pub expected: Expect,
    pub verdict: Verdict,
    /// Whether the verdict matches the expectation; a vacuous verdict
    /// satisfies an expected pass.
    pub ok: bool,
    /// The statistic behind the verdict (worst margin, ratio, …).
    pub worst: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Outcome {
    pub fn new(name: impl Into<String>, expected: Expect, verdict: Verdict, worst: f64) -> Self {
        let ok = match expected {
            Expect::Pass => verdict != Verdict::Fail,
            Expect::Fail => verdict == Verdict::Fail,
        };
        Outcome {
            name: name.into(),
            expected,
            verdict,
            ok,
            worst: Real(worst),
            witness: None,
            details: BTreeMap::new(),
            note: None,
        }
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), Real(value));
        self
    }

    pub fn witness(mut self, w: Option<String>) -> Self {
        self.witness = w;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceSummary {
    pub persistent_arcs: Vec<Arc>,
    pub vanishing_arcs: Vec<Arc>,
    pub quasi_strongly_connected: bool,
    pub centers: Vec<NodeId>,
    /// Diameter of the persistent graph.
    pub diameter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: TimeMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub start: f64,
    pub end: f64,
    pub persistence: PersistenceSummary,
    pub checks: Vec<Outcome>,
    pub certificates: Vec<Outcome>,
    /// Why the run stopped before simulating, if it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    pub samples: usize,
    /// File name of the trajectory CSV, relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
    /// Excluded from [`RunReport::body`]; everything else is deterministic.
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.aborted.is_none() && self.checks.iter().chain(&self.certificates).all(|o| o.ok)
    }

    /// Text rendering without the wall time.
    pub fn body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "mode: {}", self.mode);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed: {seed}");
        }
        let _ = writeln!(s, "interval: [{}, {}]", Real(self.start), Real(self.end));
        let p = &self.persistence;
        let list = |arcs: &[Arc]| {
            if arcs.is_empty() {
                "none".to_string()
            } else {
                arcs.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
            }
        };
        let _ = writeln!(s, "persistent arcs: {}", list(&p.persistent_arcs));
        let _ = writeln!(s, "vanishing arcs: {}", list(&p.vanishing_arcs));
        let _ = writeln!(
            s,
            "persistent graph: {}quasi-strongly connected, diameter {}",
            if p.quasi_strongly_connected { "" } else { "not " },
            p.diameter
        );
        for (title, items) in [("checks", &self.checks), ("certificates", &self.certificates)] {
            if items.is_empty() {
                continue;
            }
            let _ = writeln!(s, "{title}:");
            for o in items {
                let _ = writeln!(
                    s,
                    "  [{}] {} verdict={:?} expected={:?} worst={}",
                    if o.ok { "ok" } else { "FAIL" },
                    o.name,
                    o.verdict,
                    o.expected,
                    o.worst
                );
                for (k, v) in &o.details {
                    let _ = writeln!(s, "        {k} = {v}");
                }
                if let Some(w) = &o.witness {
                    let _ = writeln!(s, "        witness: {w}");
                }
                if let Some(n) = &o.note {
                    let _ = writeln!(s, "        note: {n}");
                }
            }
        }
        if let Some(a) = &self.aborted {
            let _ = writeln!(s, "aborted: {a}");
        }
        let _ = writeln!(s, "samples: {}", self.samples);
        if let Some(csv) = &self.trajectory_csv {
            let _ = writeln!(s, "trajectory: {csv}");
        }
        let _ = writeln!(s, "result: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    pub fn render_text(&self) -> String {
        format!("{}wall time: {:.3} s\n", self.body(), self.wall_time_seconds)
    }

    pub fn to_json(&self) -> Result<String, ScenarioError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<RunReport, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `<name>.report.txt` and `<name>.report.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let dir = dir.as_ref();
        let io = |path: &Path, source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        };
        let txt = dir.join(format!("{}.report.txt", self.scenario));
        std::fs::write(&txt, self.render_text()).map_err(|e| io(&txt, e))?;
        let json = dir.join(format!("{}.report.json", self.scenario));
        std::fs::write(&json, self.to_json()?).map_err(|e| io(&json, e))?;
        Ok(())
    }
}

pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RunReport::from_json(&text)
}
