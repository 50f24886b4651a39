use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Persistence, TailBound, TimeMode, WeightError, WeightFunction};
use crate::graph::{Arc, Digraph, NodeId};

/// Self-influence of a node in discrete mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelfWeight {
    /// `1 - ξ⁺(t; i)`: whatever the in-arcs leave over.
    Complement,
    Explicit { weight: WeightFunction },
}

/// Underlying digraph plus one weight function per arc.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingNetwork {
    graph: Digraph,
    weights: Vec<WeightFunction>,
    self_weights: Vec<SelfWeight>,
    mode: TimeMode,
    // (tail, arc index) per head
    incoming: Vec<Vec<(usize, usize)>>,
}

impl TimeVaryingNetwork {
    /// Every graph arc needs exactly one weight. Self weights default to
    /// [`SelfWeight::Complement`].
    pub fn new<I>(graph: Digraph, arc_weights: I, mode: TimeMode) -> Result<Self, WeightError>
    where
        I: IntoIterator<Item = (Arc, WeightFunction)>,
    {
        let mut slots: Vec<Option<WeightFunction>> = vec![None; graph.arcs().len()];
        for (arc, w) in arc_weights {
            w.validate()?;
            let k = graph.arc_index(arc).ok_or(WeightError::UnknownArc(arc))?;
            slots[k] = Some(w);
        }
        let weights = slots
            .into_iter()
            .zip(graph.arcs())
            .map(|(w, &a)| w.ok_or(WeightError::MissingWeight(a)))
            .collect::<Result<Vec<_>, _>>()?;
        let n = graph.node_count();
        let mut incoming = vec![Vec::new(); n];
        for (k, a) in graph.arcs().iter().enumerate() {
            incoming[a.head.0].push((a.tail.0, k));
        }
        Ok(TimeVaryingNetwork {
            graph,
            weights,
            self_weights: vec![SelfWeight::Complement; n],
            mode,
            incoming,
        })
    }

    /// Replaces the self weights; one entry per node.
    pub fn with_self_weights(mut self, self_weights: Vec<SelfWeight>) -> Result<Self, WeightError> {
        if self_weights.len() != self.graph.node_count() {
            return Err(WeightError::SelfWeightCount {
                expected: self.graph.node_count(),
                got: self_weights.len(),
            });
        }
        for s in &self_weights {
            if let SelfWeight::Explicit { weight } = s {
                weight.validate()?;
            }
        }
        self.self_weights = self_weights;
        Ok(self)
    }

    /// Sets every self weight to `1 - ξ⁺`, so rows sum to one by
    /// construction. Fails if `ξ⁺(t; i) > 1` at any sampled `t`, since
    /// the self weight would then be negative.
    pub fn with_complement_self_weights<T>(mut self, times: T) -> Result<Self, WeightError>
    where
        T: IntoIterator<Item = f64>,
    {
        for t in times {
            for i in 0..self.graph.node_count() {
                let value = self.xi_plus(t, NodeId(i));
                if value > 1.0 {
                    return Err(WeightError::IncomingWeightTooLarge { node: i, t, value });
                }
            }
        }
        self.self_weights = vec![SelfWeight::Complement; self.graph.node_count()];
        Ok(self)
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn mode(&self) -> TimeMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Weight functions aligned with [`Digraph::arcs`].
    pub fn weights(&self) -> &[WeightFunction] {
        &self.weights
    }

    pub fn weight(&self, arc: Arc) -> Option<&WeightFunction> {
        self.graph.arc_index(arc).map(|k| &self.weights[k])
    }

    pub fn self_weights(&self) -> &[SelfWeight] {
        &self.self_weights
    }

    /// `(tail, arc index)` pairs for the arcs entering `i`.
    pub fn incoming(&self, i: NodeId) -> &[(usize, usize)] {
        &self.incoming[i.0]
    }

    /// `ξ⁺(t; m)`: total weight entering `m` from other nodes.
    pub fn xi_plus(&self, t: f64, m: NodeId) -> f64 {
        self.incoming[m.0]
            .iter()
            .map(|&(_, k)| self.weights[k].eval(t))
            .sum()
    }

    /// `ξ⁺` built from left limits of the weights.
    pub fn xi_plus_left(&self, t: f64, m: NodeId) -> f64 {
        self.incoming[m.0]
            .iter()
            .map(|&(_, k)| self.weights[k].eval_left(t))
            .sum()
    }

    /// Self weight of node `i` at `t`.
    pub fn self_weight(&self, t: f64, i: NodeId) -> f64 {
        match &self.self_weights[i.0] {
            SelfWeight::Complement => 1.0 - self.xi_plus(t, i),
            SelfWeight::Explicit { weight } => weight.eval(t),
        }
    }

    /// Sorted, deduplicated jump points of any arc weight in `(a, b)`.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .weights
            .iter()
            .flat_map(|w| w.breakpoints(a, b))
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }
}

/// Split of the underlying arcs into persistent and vanishing ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceReport {
    pub persistent_arcs: BTreeSet<Arc>,
    pub vanishing_arcs: BTreeSet<Arc>,
    /// Same node set, persistent arcs only.
    pub persistent_graph: Digraph,
}

impl PersistenceReport {
    pub fn is_persistent(&self, arc: Arc) -> bool {
        self.persistent_arcs.contains(&arc)
    }
}

/// Classifies every arc of the network by its weight function.
pub fn persistent_graph(net: &TimeVaryingNetwork) -> Result<PersistenceReport, WeightError> {
    let mut persistent_arcs = BTreeSet::new();
    let mut vanishing_arcs = BTreeSet::new();
    for (arc, w) in net.graph.arcs().iter().zip(&net.weights) {
        match w.classify(net.mode)? {
            Persistence::Persistent => persistent_arcs.insert(*arc),
            Persistence::Vanishing => vanishing_arcs.insert(*arc),
        };
    }
    let persistent_graph = Digraph::new(
        net.node_count(),
        persistent_arcs.iter().map(|a| (a.tail.0, a.head.0)),
    )?;
    Ok(PersistenceReport {
        persistent_arcs,
        vanishing_arcs,
        persistent_graph,
    })
}

/// `θ(t)`: total weight on vanishing arcs.
pub fn theta(net: &TimeVaryingNetwork, report: &PersistenceReport, t: f64) -> f64 {
    theta_profile(net, report).eval(t)
}

pub fn xi_plus(net: &TimeVaryingNetwork, t: f64, m: NodeId) -> f64 {
    net.xi_plus(t, m)
}

/// `ξ₀⁺(t; m)`: like `ξ⁺` but over persistent arcs only.
pub fn xi0_plus(net: &TimeVaryingNetwork, report: &PersistenceReport, t: f64, m: NodeId) -> f64 {
    net.incoming(m)
        .iter()
        .filter(|&&(tail, _)| report.is_persistent(Arc::new(tail, m.0)))
        .map(|&(_, k)| net.weights[k].eval(t))
        .sum()
}

/// The vanishing-arc weights collected as one function, `θ(t)`.
pub fn theta_profile(net: &TimeVaryingNetwork, report: &PersistenceReport) -> ThetaProfile {
    ThetaProfile::new(
        net.graph
            .arcs()
            .iter()
            .zip(&net.weights)
            .filter(|(a, _)| report.vanishing_arcs.contains(a))
            .map(|(_, w)| w.clone())
            .collect(),
    )
}

/// A sum of weight functions, used for `θ(t)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThetaProfile {
    pub terms: Vec<WeightFunction>,
}

impl ThetaProfile {
    pub fn new(terms: Vec<WeightFunction>) -> Self {
        ThetaProfile { terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|w| w.eval(t)).sum()
    }

    pub fn integral(&self, a: f64, b: f64) -> Result<f64, WeightError> {
        self.terms.iter().map(|w| w.window_integral(a, b)).sum()
    }

    /// Upper bound on `Σ_{t >= t0} θ(t)`, `None` if any term diverges.
    pub fn tail_sum(&self, t0: u64) -> Option<TailBound> {
        self.terms
            .iter()
            .try_fold(TailBound::exact(0.0), |acc, w| Some(acc.plus(w.tail_sum(t0)?)))
    }

    /// `∫_{t0}^∞ θ`, `None` if any term diverges.
    pub fn tail_integral(&self, t0: f64) -> Option<TailBound> {
        self.terms
            .iter()
            .try_fold(TailBound::exact(0.0), |acc, w| Some(acc.plus(w.tail_integral(t0)?)))
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.terms.iter().all(WeightFunction::is_nonincreasing)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_net(w01: WeightFunction, w12: WeightFunction) -> TimeVaryingNetwork {
        let g = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        TimeVaryingNetwork::new(
            g,
            [(Arc::new(0, 1), w01), (Arc::new(1, 2), w12)],
            TimeMode::Discrete,
        )
        .unwrap()
    }

    #[test]
    fn persistent_graph_examples() {
        let all_const = chain_net(WeightFunction::constant(0.1), WeightFunction::constant(0.1));
        let r = persistent_graph(&all_const).unwrap();
        assert_eq!(r.persistent_graph, *all_const.graph());

        let all_exp = chain_net(
            WeightFunction::exponential_decay(1.0, 1.0),
            WeightFunction::exponential_decay(1.0, 0.1),
        );
        let r = persistent_graph(&all_exp).unwrap();
        assert!(r.persistent_graph.arcs().is_empty());

        let mixed = chain_net(WeightFunction::constant(0.1), WeightFunction::power_decay(1.0, 2.0));
        let r = persistent_graph(&mixed).unwrap();
        assert_eq!(r.persistent_arcs, BTreeSet::from([Arc::new(0, 1)]));
        assert_eq!(r.vanishing_arcs, BTreeSet::from([Arc::new(1, 2)]));
    }

    #[test]
    fn theta_examples() {
        let none = chain_net(WeightFunction::constant(0.1), WeightFunction::constant(0.2));
        let r = persistent_graph(&none).unwrap();
        assert_eq!(theta(&none, &r, 5.0), 0.0);

        let one = chain_net(WeightFunction::constant(0.1), WeightFunction::exponential_decay(1.0, 1.0));
        let r = persistent_graph(&one).unwrap();
        assert_eq!(theta(&one, &r, 0.0), 1.0);

        let two = chain_net(WeightFunction::power_decay(1.0, 2.0), WeightFunction::power_decay(1.0, 2.0));
        let r = persistent_graph(&two).unwrap();
        assert_eq!(theta(&two, &r, 1.0), 0.5);
    }

    #[test]
    fn xi_examples() {
        let g = Digraph::new(3, [(0, 2), (1, 2)]).unwrap();
        let net = TimeVaryingNetwork::new(
            g,
            [
                (Arc::new(0, 2), WeightFunction::constant(0.2)),
                (Arc::new(1, 2), WeightFunction::exponential_decay(0.3, 0.0)),
            ],
            TimeMode::Discrete,
        )
        .unwrap();
        assert!((xi_plus(&net, 1.0, NodeId(2)) - 0.5).abs() < 1e-15);
        let g = Digraph::new(3, [(0, 2), (1, 2)]).unwrap();
        let net2 = TimeVaryingNetwork::new(
            g,
            [
                (Arc::new(0, 2), WeightFunction::constant(0.2)),
                (Arc::new(1, 2), WeightFunction::power_decay(0.3, 3.0)),
            ],
            TimeMode::Discrete,
        )
        .unwrap();
        let r = persistent_graph(&net2).unwrap();
        assert_eq!(xi0_plus(&net2, &r, 0.0, NodeId(2)), 0.2);
        assert_eq!(xi_plus(&net, 0.0, NodeId(0)), 0.0);
    }

    #[test]
    fn complement_constructor_rejects_overweight_nodes() {
        let g = Digraph::new(3, [(0, 2), (1, 2)]).unwrap();
        let net = TimeVaryingNetwork::new(
            g,
            [
                (Arc::new(0, 2), WeightFunction::constant(0.7)),
                (Arc::new(1, 2), WeightFunction::constant(0.6)),
            ],
            TimeMode::Discrete,
        )
        .unwrap();
        assert!(matches!(
            net.with_complement_self_weights([0.0]),
            Err(WeightError::IncomingWeightTooLarge { node: 2, .. })
        ));
    }

    #[test]
    fn construction_errors() {
        let g = Digraph::new(2, [(0, 1)]).unwrap();
        assert!(matches!(
            TimeVaryingNetwork::new(g.clone(), [], TimeMode::Discrete),
            Err(WeightError::MissingWeight(_))
        ));
        assert!(matches!(
            TimeVaryingNetwork::new(g, [(Arc::new(1, 0), WeightFunction::Zero)], TimeMode::Discrete),
            Err(WeightError::UnknownArc(_))
        ));
    }
}
