//! Exhaustive enumeration of small weakly connected digraphs up to
//! isomorphism, and exact `<R_c>` over each catalog.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{exhaustive_rc, ExhaustiveMode};
use crate::controllability::Criterion;
use crate::enc::check_enc;
use crate::error::{Error, Result};
use crate::graph::{arc_index, canonical_from_edges, CanonicalForm, DirectedGraph, MAX_CANONICAL_NODES};

/// Largest number of arc subsets [`enumerate_instances`] will visit.
pub const ENUMERATION_BUDGET: u128 = 10_000_000;

/// One isomorphism class.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub canonical: CanonicalForm,
    pub graph: DirectedGraph,
}

/// All weakly connected `(N, M)` digraphs up to isomorphism, sorted by
/// canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceCatalog {
    pub nodes: usize,
    pub edges: usize,
    pub instances: Vec<Instance>,
}

impl InstanceCatalog {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Arcs in index order, so bit `width - 1 - i` of a mask is `arcs[i]`.
fn arc_table(n: usize) -> Vec<(usize, usize)> {
    let mut arcs = vec![(0, 0); n * (n - 1)];
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            arcs[arc_index(n, u, v)] = (u, v);
        }
    }
    arcs
}

fn mask_edges(mask: u64, arcs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let width = arcs.len();
    (0..width)
        .filter(|i| mask >> (width - 1 - i) & 1 == 1)
        .map(|i| arcs[i])
        .collect()
}

fn weakly_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

/// Enumerates every weakly connected simple digraph with `n` nodes and `m`
/// arcs, one representative per isomorphism class.
pub fn enumerate_instances(n: usize, m: usize) -> Result<InstanceCatalog> {
    if !(2..=MAX_CANONICAL_NODES).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "enumeration needs 2 <= N <= {MAX_CANONICAL_NODES}, got {n}"
        )));
    }
    let width = n * (n - 1);
    if m > width {
        return Err(Error::InvalidParameter(format!(
            "M = {m} exceeds N(N-1) = {width}"
        )));
    }
    let subsets = binomial(width as u128, m as u128);
    if subsets > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "{subsets} arc subsets for N = {n}, M = {m}"
        )));
    }
    if m + 1 < n {
        return Ok(InstanceCatalog { nodes: n, edges: m, instances: Vec::new() });
    }

    let arcs = arc_table(n);
    let full = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    // isomorphism classes of a graph and its complement are in bijection, so
    // the sparser side gives a cheaper dedup key
    let complement_key = m > width / 2;
    let mut masks = Vec::with_capacity(subsets as usize);
    if m == 0 {
        masks.push(0);
    } else {
        let mut x: u64 = (1u64 << m) - 1;
        loop {
            masks.push(x);
            // Gosper's hack
            let c = x & x.wrapping_neg();
            let r = x + c;
            if r > full || r == 0 {
                break;
            }
            x = (((r ^ x) >> 2) / c) | r;
            if x > full {
                break;
            }
        }
    }
    let keyed: Vec<(CanonicalForm, u64)> = masks
        .into_par_iter()
        .filter_map(|mask| {
            let edges = mask_edges(mask, &arcs);
            if !weakly_connected(n, &edges) {
                return None;
            }
            let key = if complement_key {
                canonical_from_edges(n, &mask_edges(full ^ mask, &arcs))
            } else {
                canonical_from_edges(n, &edges)
            };
            Some((key, mask))
        })
        .collect();
    let mut classes: HashMap<CanonicalForm, u64> = HashMap::new();
    for (key, mask) in keyed {
        classes.entry(key).or_insert(mask);
    }
    let mut instances: Vec<Instance> = classes
        .into_values()
        .map(|mask| {
            let edges = mask_edges(mask, &arcs);
            let canonical = canonical_from_edges(n, &edges);
            let graph = DirectedGraph::from_edges(n, edges)?;
            Ok(Instance { canonical, graph })
        })
        .collect::<Result<_>>()?;
    instances.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    Ok(InstanceCatalog { nodes: n, edges: m, instances })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEvaluation {
    pub canonical: CanonicalForm,
    pub rc: BigRational,
    pub enc: bool,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEvaluation {
    pub nodes: usize,
    pub edges: usize,
    pub criterion: Criterion,
    pub rows: Vec<InstanceEvaluation>,
    pub best_rc: Option<BigRational>,
}

/// Counts for one `(N, M)` row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogSummary {
    pub nodes: usize,
    pub edges: usize,
    pub instances: usize,
    pub enc: usize,
    pub optimal: usize,
    pub optimal_within_enc: bool,
}

impl CatalogEvaluation {
    pub fn enc_count(&self) -> usize {
        self.rows.iter().filter(|r| r.enc).count()
    }

    pub fn optimal_count(&self) -> usize {
        self.rows.iter().filter(|r| r.optimal).count()
    }

    pub fn summary(&self) -> CatalogSummary {
        CatalogSummary {
            nodes: self.nodes,
            edges: self.edges,
            instances: self.rows.len(),
            enc: self.enc_count(),
            optimal: self.optimal_count(),
            optimal_within_enc: verify_subset_relation(self),
        }
    }

    /// `canonical,edges,enc,rc_num,rc_den,optimal`, one row per instance.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("canonical,edges,enc,rc_num,rc_den,optimal\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.canonical.to_hex(),
                self.edges,
                r.enc as u8,
                r.rc.numer(),
                r.rc.denom(),
                r.optimal as u8
            );
        }
        out
    }
}

/// Exact `<R_c>` and ENC membership for every instance; the minimizers of
/// `<R_c>` are flagged optimal.
pub fn evaluate_catalog(catalog: &InstanceCatalog, criterion: Criterion) -> Result<CatalogEvaluation> {
    let scored: Vec<(BigRational, bool)> = catalog
        .instances
        .iter()
        .map(|inst| {
            let score = exhaustive_rc(&inst.graph, ExhaustiveMode::Subsets, criterion)?;
            let rc = score.exact.expect("subset mode is exact");
            Ok((rc, check_enc(&inst.graph)?.satisfied))
        })
        .collect::<Result<_>>()?;
    let best_rc = scored.iter().map(|(rc, _)| rc).min().cloned();
    let rows = catalog
        .instances
        .iter()
        .zip(scored)
        .map(|(inst, (rc, enc))| InstanceEvaluation {
            canonical: inst.canonical.clone(),
            optimal: Some(&rc) == best_rc.as_ref(),
            rc,
            enc,
        })
        .collect();
    Ok(CatalogEvaluation {
        nodes: catalog.nodes,
        edges: catalog.edges,
        criterion,
        rows,
        best_rc,
    })
}

/// Whether every optimal instance satisfies ENC.
pub fn verify_subset_relation(eval: &CatalogEvaluation) -> bool {
    eval.rows.iter().filter(|r| r.optimal).all(|r| r.enc)
}

/// `<R_c>` as a decimal with `digits` places.
pub fn rational_to_decimal(x: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let (q, r) = (&scaled / &scale, &scaled % &scale);
    if digits == 0 {
        return q.to_string();
    }
    let sign = if scaled < BigInt::from(0) && q == BigInt::from(0) { "-" } else { "" };
    let r = if r < BigInt::from(0) { -r } else { r };
    format!("{sign}{q}.{:0>width$}", r.to_string(), width = digits)
}
