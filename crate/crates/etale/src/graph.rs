//! Object graphs: adjacency structure standing in for the topology of the
//! space of objects. Connectivity, covers, and "continuous map" checks all
//! reduce to graph conditions on this type.

use std::collections::BTreeSet;

use thiserror::Error;

/// Index of an object in an [`ObjectGraph`].
pub type ObjId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references an unknown object")]
    UnknownObject(ObjId, ObjId),
    #[error("self-loop edge at object {0} is not allowed")]
    SelfLoop(ObjId),
    #[error("object label {0:?} is not unique")]
    DuplicateLabel(String),
}

/// Finite set of objects plus an undirected adjacency relation.
///
/// Edges model which objects are "infinitesimally close"; graph-connected
/// subsets play the role of connected open sets and trees play the role of
/// simply connected spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectGraph {
    labels: Vec<String>,
    edges: BTreeSet<(ObjId, ObjId)>,
    adj: Vec<Vec<ObjId>>,
}

impl ObjectGraph {
    /// Graph with the given object labels and no edges.
    pub fn new(labels: Vec<String>) -> Result<Self, GraphError> {
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.clone()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        let n = labels.len();
        Ok(ObjectGraph {
            labels,
            edges: BTreeSet::new(),
            adj: vec![Vec::new(); n],
        })
    }

    /// Graph with `n` objects labelled by their indices.
    pub fn with_indices(n: usize) -> Self {
        ObjectGraph::new((0..n).map(|i| i.to_string()).collect()).unwrap()
    }

    pub fn add_edge(&mut self, a: ObjId, b: ObjId) -> Result<(), GraphError> {
        if a >= self.len() || b >= self.len() {
            return Err(GraphError::UnknownObject(a, b));
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let e = (a.min(b), a.max(b));
        if self.edges.insert(e) {
            self.adj[a].push(b);
            self.adj[b].push(a);
            self.adj[a].sort_unstable();
            self.adj[b].sort_unstable();
        }
        Ok(())
    }

    /// Path graph on the given labels, consecutive objects adjacent.
    pub fn path(labels: &[&str]) -> Self {
        let mut g = ObjectGraph::new(labels.iter().map(|s| s.to_string()).collect()).unwrap();
        for i in 1..labels.len() {
            g.add_edge(i - 1, i).unwrap();
        }
        g
    }

    /// Cycle graph on `n` objects.
    pub fn cycle(n: usize) -> Self {
        let mut g = ObjectGraph::with_indices(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n).unwrap();
        }
        g
    }

    /// Star graph: object 0 is the hub, objects 1..=k the leaves.
    pub fn star(k: usize) -> Self {
        let mut g = ObjectGraph::with_indices(k + 1);
        for i in 1..=k {
            g.add_edge(0, i).unwrap();
        }
        g
    }

    /// One object, no edges.
    pub fn point() -> Self {
        ObjectGraph::new(vec!["*".to_string()]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, x: ObjId) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn find_label(&self, label: &str) -> Option<ObjId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn edges(&self) -> impl Iterator<Item = (ObjId, ObjId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, x: ObjId) -> &[ObjId] {
        &self.adj[x]
    }

    pub fn is_adjacent(&self, a: ObjId, b: ObjId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Adjacent or equal: the graph reading of "arbitrarily close".
    pub fn is_close(&self, a: ObjId, b: ObjId) -> bool {
        a == b || self.is_adjacent(a, b)
    }

    /// Closed star of `x`: the object together with its neighbors.
    pub fn closed_star(&self, x: ObjId) -> Vec<ObjId> {
        let mut s = vec![x];
        s.extend_from_slice(&self.adj[x]);
        s.sort_unstable();
        s
    }

    /// Connected-component id per object, components numbered by least member.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.len()];
        let mut next = 0;
        for start in 0..self.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = next;
            next += 1;
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(x) = stack.pop() {
                for &y in &self.adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        stack.push(y);
                    }
                }
            }
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.len() <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Acyclic and connected: the graph proxy for simply connected.
    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edges.len() + 1 == self.len().max(1)
    }

    /// Whether `subset` induces a connected subgraph (empty sets count as
    /// disconnected).
    pub fn is_connected_subset(&self, subset: &[ObjId]) -> bool {
        if subset.is_empty() {
            return false;
        }
        let inset: BTreeSet<ObjId> = subset.iter().copied().collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![subset[0]];
        seen.insert(subset[0]);
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if inset.contains(&y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == inset.len()
    }

    /// Is `f` a graph map? Edges must land on edges or collapse to a point,
    /// the combinatorial shadow of continuity.
    pub fn is_graph_map(&self, target: &ObjectGraph, f: &[ObjId]) -> bool {
        if f.len() != self.len() {
            return false;
        }
        if f.iter().any(|&y| y >= target.len()) {
            return false;
        }
        self.edges().all(|(a, b)| target.is_close(f[a], f[b]))
    }

    /// All graph maps into `target`, in lexicographic order.
    pub fn graph_maps(&self, target: &ObjectGraph) -> Vec<Vec<ObjId>> {
        let mut out = Vec::new();
        let mut f = vec![0usize; self.len()];
        self.graph_maps_rec(target, &mut f, 0, &mut out);
        out
    }

    fn graph_maps_rec(
        &self,
        target: &ObjectGraph,
        f: &mut Vec<ObjId>,
        k: usize,
        out: &mut Vec<Vec<ObjId>>,
    ) {
        if k == self.len() {
            out.push(f.clone());
            return;
        }
        'cand: for y in 0..target.len() {
            for &x in self.adj[k].iter().filter(|&&x| x < k) {
                if !target.is_close(f[x], y) {
                    continue 'cand;
                }
            }
            f[k] = y;
            self.graph_maps_rec(target, f, k + 1, out);
        }
    }

    /// All automorphisms (edge-preserving permutations), lexicographic order.
    pub fn automorphisms(&self) -> Vec<Vec<ObjId>> {
        let n = self.len();
        let mut out = Vec::new();
        let mut perm = vec![usize::MAX; n];
        let mut used = vec![false; n];
        self.automorphisms_rec(&mut perm, &mut used, 0, &mut out);
        out
    }

    fn automorphisms_rec(
        &self,
        perm: &mut Vec<ObjId>,
        used: &mut Vec<bool>,
        k: usize,
        out: &mut Vec<Vec<ObjId>>,
    ) {
        let n = self.len();
        if k == n {
            out.push(perm.clone());
            return;
        }
        'cand: for y in 0..n {
            if used[y] || self.adj[k].len() != self.adj[y].len() {
                continue;
            }
            for x in 0..k {
                if self.is_adjacent(k, x) != self.is_adjacent(y, perm[x]) {
                    continue 'cand;
                }
            }
            perm[k] = y;
            used[y] = true;
            self.automorphisms_rec(perm, used, k + 1, out);
            used[y] = false;
        }
        perm[k] = usize::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_basics() {
        let g = ObjectGraph::path(&["-1", "0", "1"]);
        assert_eq!(g.len(), 3);
        assert!(g.is_adjacent(0, 1));
        assert!(!g.is_adjacent(0, 2));
        assert!(g.is_tree());
        assert!(g.is_connected_subset(&[0, 1]));
        assert!(!g.is_connected_subset(&[0, 2]));
    }

    #[test]
    fn cycle_is_not_tree() {
        let g = ObjectGraph::cycle(4);
        assert!(g.is_connected());
        assert!(!g.is_tree());
        assert_eq!(g.closed_star(0), vec![0, 1, 3]);
    }

    #[test]
    fn no_self_loops() {
        let mut g = ObjectGraph::with_indices(2);
        assert_eq!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1)));
    }

    #[test]
    fn graph_maps_allow_collapse() {
        let p = ObjectGraph::path(&["a", "b"]);
        let maps = p.graph_maps(&p);
        // 2 constant maps + 2 bijections = 4 total on an edge.
        assert_eq!(maps.len(), 4);
        assert!(maps.contains(&vec![0, 0]));
        assert!(maps.contains(&vec![1, 0]));
    }

    #[test]
    fn path3_automorphisms() {
        let g = ObjectGraph::path(&["-1", "0", "1"]);
        let autos = g.automorphisms();
        assert_eq!(autos.len(), 2);
        assert!(autos.contains(&vec![0, 1, 2]));
        assert!(autos.contains(&vec![2, 1, 0]));
    }
}
