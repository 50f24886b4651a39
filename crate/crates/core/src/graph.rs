//! Static directed graphs and the connectivity queries the agreement
//! results are conditioned on.
//!
//! Arc convention: an [`Arc`] with `tail = j` and `head = i` carries the
//! influence of node `j` on node `i`; its weight is what the dynamics call
//! `W_ij`. Self-influence is never stored as an arc. The update rules add
//! the self term themselves.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range for a graph with {n} nodes")]
    InvalidNode { node: usize, n: usize },
    #[error("self-loop on node {0}; self-influence belongs to the dynamics, not the arc set")]
    SelfLoop(usize),
}

/// Dense node index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Directed arc `tail -> head`: `tail` influences `head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
}

impl Arc {
    pub fn new(tail: usize, head: usize) -> Self {
        Arc {
            tail: NodeId(tail),
            head: NodeId(head),
        }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}->{})", self.tail, self.head)
    }
}

/// Simple digraph on nodes `0..n`. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a digraph; duplicate arcs are merged.
    pub fn new<I>(n: usize, arcs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut set = BTreeSet::new();
        for (tail, head) in arcs {
            for node in [tail, head] {
                if node >= n {
                    return Err(GraphError::InvalidNode { node, n });
                }
            }
            if tail == head {
                return Err(GraphError::SelfLoop(tail));
            }
            set.insert(Arc::new(tail, head));
        }
        let arcs: Vec<Arc> = set.into_iter().collect();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for a in &arcs {
            out_adj[a.tail.0].push(a.head.0);
            in_adj[a.head.0].push(a.tail.0);
        }
        Ok(Digraph {
            n,
            arcs,
            out_adj,
            in_adj,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Arcs in lexicographic `(tail, head)` order.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn contains_arc(&self, arc: Arc) -> bool {
        self.arcs.binary_search(&arc).is_ok()
    }

    /// Position of `arc` in [`Digraph::arcs`].
    pub fn arc_index(&self, arc: Arc) -> Option<usize> {
        self.arcs.binary_search(&arc).ok()
    }

    /// Nodes with an arc into `i` (the in-neighbours that influence `i`).
    pub fn in_neighbors(&self, i: NodeId) -> &[usize] {
        &self.in_adj[i.0]
    }

    pub fn out_neighbors(&self, i: NodeId) -> &[usize] {
        &self.out_adj[i.0]
    }

    fn check(&self, i: NodeId) -> Result<(), GraphError> {
        if i.0 >= self.n {
            Err(GraphError::InvalidNode { node: i.0, n: self.n })
        } else {
            Ok(())
        }
    }

    /// BFS hop counts from `source`; `None` marks unreachable nodes.
    fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in &self.out_adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Every node reachable from `i`, including `i` itself.
    pub fn reachable_set(&self, i: NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        self.check(i)?;
        Ok(self
            .bfs(i.0)
            .into_iter()
            .enumerate()
            .filter_map(|(j, d)| d.map(|_| NodeId(j)))
            .collect())
    }

    /// Shortest-path length `i -> j` in hops, `None` if unreachable.
    pub fn distance(&self, i: NodeId, j: NodeId) -> Result<Option<usize>, GraphError> {
        self.check(i)?;
        self.check(j)?;
        Ok(self.bfs(i.0)[j.0])
    }

    /// Nodes from which every node is reachable.
    pub fn centers(&self) -> BTreeSet<NodeId> {
        (0..self.n)
            .filter(|&i| self.bfs(i).iter().all(Option::is_some))
            .map(NodeId)
            .collect()
    }

    pub fn is_quasi_strongly_connected(&self) -> bool {
        (0..self.n).any(|i| self.bfs(i).iter().all(Option::is_some))
    }

    pub fn is_strongly_connected(&self) -> bool {
        // Strongly connected iff node 0 reaches everyone and everyone reaches node 0.
        let forward = self.bfs(0).iter().all(Option::is_some);
        forward && self.reversed().bfs(0).iter().all(Option::is_some)
    }

    /// Largest hop distance over ordered pairs `(i, j)` with `j` reachable
    /// from `i`. Unreachable pairs are ignored, so an arcless graph has
    /// diameter 0.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.bfs(i).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }

    /// Nodes from which `target` is reachable (including `target`).
    pub fn ancestors(&self, target: NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
        self.reversed().reachable_set(target)
    }

    pub fn reversed(&self) -> Digraph {
        Digraph {
            n: self.n,
            arcs: {
                let mut v: Vec<Arc> = self
                    .arcs
                    .iter()
                    .map(|a| Arc {
                        tail: a.head,
                        head: a.tail,
                    })
                    .collect();
                v.sort();
                v
            },
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
        }
    }

    /// Two nodes whose ancestor sets are disjoint, if the graph has no
    /// center. Each ancestor set has no entering arc.
    pub fn disjoint_ancestor_pair(&self) -> Option<(BTreeSet<NodeId>, BTreeSet<NodeId>)> {
        if self.is_quasi_strongly_connected() {
            return None;
        }
        let rev = self.reversed();
        let anc: Vec<BTreeSet<NodeId>> = (0..self.n)
            .map(|i| rev.reachable_set(NodeId(i)).expect("valid node"))
            .collect();
        for u in 0..self.n {
            for w in (u + 1)..self.n {
                if anc[u].is_disjoint(&anc[w]) {
                    return Some((anc[u].clone(), anc[w].clone()));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> BTreeSet<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn reachability_examples() {
        let chain = Digraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(chain.reachable_set(NodeId(0)).unwrap(), ids(&[0, 1, 2]));
        let empty = Digraph::new(3, []).unwrap();
        assert_eq!(empty.reachable_set(NodeId(0)).unwrap(), ids(&[0]));
        let wrong_way = Digraph::new(2, [(1, 0)]).unwrap();
        assert_eq!(wrong_way.reachable_set(NodeId(0)).unwrap(), ids(&[0]));
        assert_eq!(
            chain.reachable_set(NodeId(7)),
            Err(GraphError::InvalidNode { node: 7, n: 3 })
        );
    }

    #[test]
    fn centers_examples() {
        let star = Digraph::new(3, [(0, 1), (0, 2)]).unwrap();
        assert_eq!(star.centers(), ids(&[0]));
        let cycle = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(cycle.centers(), ids(&[0, 1, 2]));
        let isolated = Digraph::new(2, []).unwrap();
        assert!(isolated.centers().is_empty());
    }

    #[test]
    fn connectivity_examples() {
        let star = Digraph::new(3, [(0, 1), (0, 2)]).unwrap();
        let cycle = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let partial = Digraph::new(3, [(0, 1)]).unwrap();
        assert!(star.is_quasi_strongly_connected());
        assert!(!partial.is_quasi_strongly_connected());
        assert!(cycle.is_quasi_strongly_connected());
        assert!(cycle.is_strongly_connected());
        assert!(!star.is_strongly_connected());
        assert!(Digraph::new(1, []).unwrap().is_strongly_connected());
    }

    #[test]
    fn diameter_examples() {
        let cycle = Digraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(cycle.diameter(), 2);
        let star = Digraph::new(3, [(0, 1), (0, 2)]).unwrap();
        assert_eq!(star.diameter(), 1);
        let chain = Digraph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(chain.diameter(), 3);
        assert_eq!(Digraph::new(3, []).unwrap().diameter(), 0);
    }

    #[test]
    fn rejects_bad_arcs() {
        assert_eq!(Digraph::new(0, []), Err(GraphError::Empty));
        assert_eq!(Digraph::new(2, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Digraph::new(3, [(0, 5)]),
            Err(GraphError::InvalidNode { node: 5, n: 3 })
        );
    }

    #[test]
    fn disjoint_ancestors_for_two_blocks() {
        let g = Digraph::new(4, [(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let (u, w) = g.disjoint_ancestor_pair().unwrap();
        assert_eq!(u, ids(&[0, 1]));
        assert_eq!(w, ids(&[2, 3]));
        let star = Digraph::new(3, [(0, 1), (0, 2)]).unwrap();
        assert!(star.disjoint_ancestor_pair().is_none());
    }
}
