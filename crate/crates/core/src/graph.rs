//! Simple directed graphs.
//!
//! [`DirectedGraph`] is immutable once built: every operation that changes the
//! structure returns a new value. [`EdgeSet`] is the mutable counterpart used
//! by generators and rectification, frozen into a [`DirectedGraph`] when done.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count accepted by [`DirectedGraph::canonical_form`].
pub const MAX_CANONICAL_NODES: usize = 8;

/// Which end of the edges a degree refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::In => "in",
            Side::Out => "out",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A simple directed graph: no self-loops, no parallel edges.
///
/// Adjacency lists are kept sorted, so iteration order is deterministic and
/// two graphs with the same labeled edge set compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectedGraph {
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    edge_count: usize,
}

/// In- and out-degree of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector {
    pub in_degrees: Vec<usize>,
    pub out_degrees: Vec<usize>,
}

impl DegreeVector {
    pub fn side(&self, side: Side) -> &[usize] {
        match side {
            Side::In => &self.in_degrees,
            Side::Out => &self.out_degrees,
        }
    }
}

/// Byte string identifying the isomorphism class of a small graph.
///
/// Layout: one byte holding the node count followed by the minimal adjacency
/// bit string as a big-endian `u64`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl DirectedGraph {
    /// Empty graph on `n` nodes.
    pub fn empty(n: usize) -> Self {
        DirectedGraph {
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = EdgeSet::new(n);
        for (u, v) in edges {
            set.check_pair(u, v)?;
            if !set.insert(u, v) {
                return Err(Error::DuplicateEdge(u, v));
            }
        }
        Ok(set.freeze())
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Self {
        match n {
            0 | 1 => Self::empty(n),
            2 => Self::from_edges(2, [(0, 1), (1, 0)]).unwrap(),
            _ => Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap(),
        }
    }

    /// Directed chain `0 -> 1 -> ... -> n-1`.
    pub fn chain(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    /// Node 0 pointing to every other node.
    pub fn out_star(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (0, i))).unwrap()
    }

    pub fn node_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// `N (N - 1)`, the number of possible arcs.
    pub fn max_edges(&self) -> usize {
        let n = self.node_count();
        n * n.saturating_sub(1)
    }

    /// Sparse when `M / M_max <= 0.05`.
    pub fn is_sparse(&self) -> bool {
        let max = self.max_edges();
        max == 0 || (self.edge_count as f64) / (max as f64) <= 0.05
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_adj[u].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.out_adj[u].binary_search(&v).is_ok()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, outs)| outs.iter().map(move |&v| (u, v)))
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector {
            in_degrees: self.in_adj.iter().map(Vec::len).collect(),
            out_degrees: self.out_adj.iter().map(Vec::len).collect(),
        }
    }

    pub fn degree_sequence(&self, side: Side) -> Vec<usize> {
        let adj = match side {
            Side::In => &self.in_adj,
            Side::Out => &self.out_adj,
        };
        adj.iter().map(Vec::len).collect()
    }

    /// Deletes `v` and its incident edges; ids above `v` shift down by one.
    pub fn remove_node(&self, v: usize) -> Result<Self> {
        let n = self.node_count();
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, nodes: n });
        }
        let mut keep = vec![true; n];
        keep[v] = false;
        Ok(self.induced_subgraph(&keep))
    }

    /// Subgraph induced by the nodes with `keep[i] == true`, re-indexed densely
    /// in original order.
    pub fn induced_subgraph(&self, keep: &[bool]) -> Self {
        assert_eq!(keep.len(), self.node_count());
        let mut new_id = vec![usize::MAX; keep.len()];
        let mut next = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_id[i] = next;
                next += 1;
            }
        }
        let mut set = EdgeSet::new(next);
        for (u, v) in self.edges() {
            if keep[u] && keep[v] {
                set.insert(new_id[u], new_id[v]);
            }
        }
        set.freeze()
    }

    /// Applies `perm` as `old id -> new id`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::InvalidParameter(format!(
                "permutation has length {} for {} nodes",
                perm.len(),
                n
            )));
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            seen[p] = true;
        }
        Self::from_edges(n, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Whether the undirected shadow has exactly one component.
    pub fn is_weakly_connected(&self) -> Result<bool> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::Degenerate("weak connectivity of an empty graph"));
        }
        Ok(self.weak_component_count() == 1)
    }

    /// Number of components of the undirected shadow.
    pub fn weak_component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &w in self.out_adj[u].iter().chain(self.in_adj[u].iter()) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    /// Minimum adjacency bit string over all `N!` relabelings.
    pub fn canonical_form(&self) -> Result<CanonicalForm> {
        let n = self.node_count();
        if n > MAX_CANONICAL_NODES {
            return Err(Error::BudgetExceeded(format!(
                "canonical form needs N <= {MAX_CANONICAL_NODES}, got {n}"
            )));
        }
        let edges: Vec<(usize, usize)> = self.edges().collect();
        Ok(canonical_from_edges(n, &edges))
    }

    /// Complement within the complete digraph (self-loops still excluded).
    pub fn complement(&self) -> Self {
        let n = self.node_count();
        let mut set = EdgeSet::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v && !self.has_edge(u, v) {
                    set.insert(u, v);
                }
            }
        }
        set.freeze()
    }

    /// Mutable copy of the edge set.
    pub fn to_edge_set(&self) -> EdgeSet {
        let mut set = EdgeSet::new(self.node_count());
        for (u, v) in self.edges() {
            set.insert(u, v);
        }
        set
    }
}

/// Position of arc `(u, v)` in the row-major adjacency bit string, diagonal skipped.
#[inline]
pub(crate) fn arc_index(n: usize, u: usize, v: usize) -> usize {
    u * (n - 1) + if v > u { v - 1 } else { v }
}

fn permutations(n: usize) -> &'static [Vec<u8>] {
    static TABLES: [OnceLock<Vec<Vec<u8>>>; MAX_CANONICAL_NODES + 1] =
        [const { OnceLock::new() }; MAX_CANONICAL_NODES + 1];
    TABLES[n].get_or_init(|| {
        // Heap's algorithm
        let mut a: Vec<u8> = (0..n as u8).collect();
        let mut out = vec![a.clone()];
        let mut c = vec![0usize; n];
        let mut i = 0;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    a.swap(0, i);
                } else {
                    a.swap(c[i], i);
                }
                out.push(a.clone());
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        out
    })
}

pub(crate) fn canonical_from_edges(n: usize, edges: &[(usize, usize)]) -> CanonicalForm {
    let best = if n < 2 {
        0
    } else {
        let width = n * (n - 1);
        let mut best = u64::MAX;
        for perm in permutations(n) {
            let mut bits = 0u64;
            for &(u, v) in edges {
                let idx = arc_index(n, perm[u] as usize, perm[v] as usize);
                bits |= 1u64 << (width - 1 - idx);
            }
            best = best.min(bits);
        }
        best
    };
    let mut bytes = Vec::with_capacity(9);
    bytes.push(n as u8);
    bytes.extend_from_slice(&best.to_be_bytes());
    CanonicalForm(bytes)
}

/// Mutable edge set with O(1) membership, used while building or rewiring.
#[derive(Debug, Clone)]
pub struct EdgeSet {
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    present: HashSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(n: usize) -> Self {
        EdgeSet {
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            present: HashSet::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.present.len()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.present.contains(&(u, v))
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<()> {
        let n = self.node_count();
        for node in [u, v] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, nodes: n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(())
    }

    /// Inserts `u -> v`; false when the edge exists or would be a self-loop.
    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        if u == v || !self.present.insert((u, v)) {
            return false;
        }
        self.out_adj[u].push(v);
        self.in_adj[v].push(u);
        true
    }

    pub fn remove(&mut self, u: usize, v: usize) -> bool {
        if !self.present.remove(&(u, v)) {
            return false;
        }
        let pos = self.out_adj[u].iter().position(|&x| x == v).unwrap();
        self.out_adj[u].swap_remove(pos);
        let pos = self.in_adj[v].iter().position(|&x| x == u).unwrap();
        self.in_adj[v].swap_remove(pos);
        true
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_adj[u].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj[v].len()
    }

    pub fn degree(&self, side: Side, node: usize) -> usize {
        match side {
            Side::In => self.in_degree(node),
            Side::Out => self.out_degree(node),
        }
    }

    /// Edges in lexicographic order.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self.present.iter().copied().collect();
        edges.sort_unstable();
        edges
    }

    pub fn freeze(mut self) -> DirectedGraph {
        for list in self.out_adj.iter_mut().chain(self.in_adj.iter_mut()) {
            list.sort_unstable();
        }
        DirectedGraph {
            edge_count: self.present.len(),
            out_adj: self.out_adj,
            in_adj: self.in_adj,
        }
    }

    pub fn to_graph(&self) -> DirectedGraph {
        self.clone().freeze()
    }
}
