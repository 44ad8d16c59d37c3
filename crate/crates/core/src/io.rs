//! Plain-text edge lists: one `u v` pair per line, `#` or `%` comments.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// A parsed edge list together with what was dropped while reading it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeListDocument {
    pub graph: DirectedGraph,
    /// External id of each internal node.
    pub labels: Vec<u64>,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

impl EdgeListDocument {
    /// `internal,external` rows.
    pub fn remap_csv(&self) -> String {
        let mut out = String::from("internal,external\n");
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{i},{l}");
        }
        out
    }
}

/// Reads `# Nodes: N` from a SNAP-style header line.
fn declared_nodes(comment: &str) -> Option<usize> {
    let rest = &comment[comment.find("Nodes:")? + "Nodes:".len()..];
    rest.split_whitespace().next()?.parse().ok()
}

/// Parses a whitespace- or comma-separated edge list.
///
/// External ids are mapped to `0..N` in ascending order. When a `# Nodes: N`
/// header is present and every id is below `N`, ids are kept as they are, so
/// isolated nodes survive. Self-loops and repeated arcs are dropped and
/// counted; ids that only appear in self-loops still become nodes.
pub fn parse_edge_list(text: &str) -> Result<EdgeListDocument> {
    let mut declared = None;
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#').or_else(|| line.strip_prefix('%')) {
            declared = declared.or_else(|| declared_nodes(comment));
            continue;
        }
        let mut fields = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty());
        let mut next = |what: &str| -> Result<u64> {
            let f = fields.next().ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("missing {what} node"),
            })?;
            f.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("invalid node id {f:?}"),
            })
        };
        let u = next("source")?;
        let v = next("target")?;
        raw.push((u, v));
    }

    let ids: BTreeSet<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    let labels: Vec<u64> = match declared {
        Some(n) if ids.iter().all(|&id| id < n as u64) => (0..n as u64).collect(),
        _ => ids.into_iter().collect(),
    };
    let index = |id: u64| labels.binary_search(&id).expect("every id is labelled");

    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let (mut self_loops, mut duplicates) = (0, 0);
    for (u, v) in raw {
        if u == v {
            self_loops += 1;
        } else if !seen.insert((u, v)) {
            duplicates += 1;
        } else {
            edges.push((index(u), index(v)));
        }
    }
    Ok(EdgeListDocument {
        graph: DirectedGraph::from_edges(labels.len(), edges)?,
        labels,
        self_loops_dropped: self_loops,
        duplicates_dropped: duplicates,
    })
}

/// Tab-separated edge list with a header recording `N` and `M`.
pub fn emit_edge_list(g: &DirectedGraph) -> String {
    let mut out = format!(
        "# Directed graph\n# Nodes: {} Edges: {}\n",
        g.node_count(),
        g.edge_count()
    );
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u}\t{v}");
    }
    out
}
