//! Driver-node counts.
//!
//! Structural controllability counts unmatched nodes of a maximum matching
//! (`N_D = max{1, N - |E*|}`); exact controllability uses the rank of the 0/1
//! adjacency matrix (`N_D = max{1, N - rank A}`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

const NONE: usize = usize::MAX;

/// Matrices up to this size use fraction-free integer elimination; larger ones
/// use rank modulo two 62-bit primes.
pub const EXACT_RANK_LIMIT: usize = 48;

/// 62-bit primes used by the modular rank path.
pub const RANK_PRIMES: [u64; 2] = [4_611_686_018_427_387_847, 4_611_686_018_427_387_817];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Structural,
    Exact,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Structural => "structural",
            Criterion::Exact => "exact",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structural" => Ok(Criterion::Structural),
            "exact" => Ok(Criterion::Exact),
            other => Err(Error::InvalidParameter(format!("unknown criterion {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriverCount {
    pub count: usize,
    pub criterion: Criterion,
}

/// A maximum matching of the out-copy / in-copy bipartite split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingResult {
    pub matched_pairs: Vec<(usize, usize)>,
    /// Nodes that are not the head of any matched edge.
    pub unmatched_nodes: Vec<usize>,
}

impl MatchingResult {
    pub fn size(&self) -> usize {
        self.matched_pairs.len()
    }
}

/// Hopcroft-Karp matcher over a fixed adjacency restricted to alive nodes.
///
/// The matching survives node deletions: [`Matcher::release`] drops the
/// pairs touching a node and [`Matcher::augment`] re-maximizes starting from
/// what is left, which takes a couple of phases per removal.
#[derive(Debug, Clone)]
pub(crate) struct Matcher {
    match_out: Vec<usize>,
    match_in: Vec<usize>,
    size: usize,
    dist: Vec<usize>,
    cursor: Vec<usize>,
    queue: Vec<usize>,
}

impl Matcher {
    pub(crate) fn new(n: usize) -> Self {
        Matcher {
            match_out: vec![NONE; n],
            match_in: vec![NONE; n],
            size: 0,
            dist: vec![NONE; n],
            cursor: vec![0; n],
            queue: Vec::with_capacity(n),
        }
    }

    pub(crate) fn size(&self) -> usize {
        self.size
    }

    pub(crate) fn release(&mut self, v: usize) {
        let head = self.match_out[v];
        if head != NONE {
            self.match_in[head] = NONE;
            self.match_out[v] = NONE;
            self.size -= 1;
        }
        let tail = self.match_in[v];
        if tail != NONE {
            self.match_out[tail] = NONE;
            self.match_in[v] = NONE;
            self.size -= 1;
        }
    }

    pub(crate) fn augment(&mut self, adj: &[Vec<usize>], alive: &[bool]) {
        let n = adj.len();
        loop {
            self.queue.clear();
            for u in 0..n {
                if alive[u] && self.match_out[u] == NONE && !adj[u].is_empty() {
                    self.dist[u] = 0;
                    self.queue.push(u);
                } else {
                    self.dist[u] = NONE;
                }
            }
            let mut found = false;
            let mut head = 0;
            while head < self.queue.len() {
                let u = self.queue[head];
                head += 1;
                for &v in &adj[u] {
                    if !alive[v] {
                        continue;
                    }
                    let w = self.match_in[v];
                    if w == NONE {
                        found = true;
                    } else if self.dist[w] == NONE {
                        self.dist[w] = self.dist[u] + 1;
                        self.queue.push(w);
                    }
                }
            }
            if !found {
                return;
            }
            self.cursor.iter_mut().for_each(|c| *c = 0);
            let mut grew = false;
            for u in 0..n {
                if alive[u] && self.match_out[u] == NONE && self.dist[u] == 0 && self.dfs(u, adj, alive)
                {
                    self.size += 1;
                    grew = true;
                }
            }
            if !grew {
                return;
            }
        }
    }

    fn dfs(&mut self, u: usize, adj: &[Vec<usize>], alive: &[bool]) -> bool {
        while self.cursor[u] < adj[u].len() {
            let v = adj[u][self.cursor[u]];
            self.cursor[u] += 1;
            if !alive[v] {
                continue;
            }
            let w = self.match_in[v];
            let ok = w == NONE || (self.dist[w] == self.dist[u] + 1 && self.dfs(w, adj, alive));
            if ok {
                self.match_out[u] = v;
                self.match_in[v] = u;
                return true;
            }
        }
        self.dist[u] = NONE;
        false
    }

    pub(crate) fn pairs(&self) -> Vec<(usize, usize)> {
        self.match_out
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != NONE)
            .map(|(u, &v)| (u, v))
            .collect()
    }
}

pub(crate) fn out_lists(g: &DirectedGraph) -> Vec<Vec<usize>> {
    (0..g.node_count()).map(|u| g.out_neighbors(u).to_vec()).collect()
}

pub fn maximum_matching(g: &DirectedGraph) -> MatchingResult {
    let n = g.node_count();
    let adj = out_lists(g);
    let alive = vec![true; n];
    let mut m = Matcher::new(n);
    m.augment(&adj, &alive);
    let matched_pairs = m.pairs();
    let unmatched_nodes = (0..n).filter(|&v| m.match_in[v] == NONE).collect();
    MatchingResult {
        matched_pairs,
        unmatched_nodes,
    }
}

pub fn structural_drivers(g: &DirectedGraph) -> Result<DriverCount> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Degenerate("driver count of an empty graph"));
    }
    let size = maximum_matching(g).size();
    Ok(DriverCount {
        count: (n - size).max(1),
        criterion: Criterion::Structural,
    })
}

pub fn exact_drivers(g: &DirectedGraph) -> Result<DriverCount> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Degenerate("driver count of an empty graph"));
    }
    Ok(DriverCount {
        count: (n - adjacency_rank(g)).max(1),
        criterion: Criterion::Exact,
    })
}

pub fn drivers(g: &DirectedGraph, criterion: Criterion) -> Result<DriverCount> {
    match criterion {
        Criterion::Structural => structural_drivers(g),
        Criterion::Exact => exact_drivers(g),
    }
}

/// `N_D / size`.
pub fn nd_density(d: DriverCount, current_size: usize) -> Result<Ratio<u64>> {
    if current_size == 0 {
        return Err(Error::Degenerate("driver density of a graph with no nodes"));
    }
    Ok(Ratio::new(d.count as u64, current_size as u64))
}

/// Rank of the adjacency matrix over the rationals.
pub fn adjacency_rank(g: &DirectedGraph) -> usize {
    if g.node_count() <= EXACT_RANK_LIMIT {
        adjacency_rank_exact(g)
    } else {
        adjacency_rank_modular(g)
    }
}

/// Fraction-free (Bareiss) elimination over the integers.
pub fn adjacency_rank_exact(g: &DirectedGraph) -> usize {
    let n = g.node_count();
    let mut rows: Vec<Vec<BigInt>> = (0..n)
        .map(|u| {
            let mut row = vec![BigInt::zero(); n];
            for &v in g.out_neighbors(u) {
                row[v] = BigInt::one();
            }
            row
        })
        .collect();
    bareiss_rank(&mut rows)
}

pub(crate) fn bareiss_rank(rows: &mut [Vec<BigInt>]) -> usize {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..n_cols {
        let Some(pivot) = (rank..n_rows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (top, bottom) = rows.split_at_mut(rank + 1);
        let p = &top[rank];
        for row in bottom.iter_mut() {
            let factor = row[col].clone();
            for c in col..n_cols {
                let v = &row[c] * &p[col] - &factor * &p[c];
                row[c] = v / &prev;
            }
        }
        prev = top[rank][col].clone();
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rank
}

/// Largest rank of the adjacency matrix modulo the primes in [`RANK_PRIMES`].
///
/// Rank modulo a prime never exceeds the rational rank, so the maximum is the
/// better estimate; it differs only if both primes divide every maximal minor.
pub fn adjacency_rank_modular(g: &DirectedGraph) -> usize {
    RANK_PRIMES
        .iter()
        .map(|&p| adjacency_rank_mod(g, p))
        .max()
        .unwrap_or(0)
}

pub fn adjacency_rank_mod(g: &DirectedGraph, p: u64) -> usize {
    let n = g.node_count();
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|u| {
            let mut row = vec![0u64; n];
            for &v in g.out_neighbors(u) {
                row[v] = 1;
            }
            row
        })
        .collect();
    rank_mod_p(&mut rows, p)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub(crate) fn rank_mod_p(rows: &mut [Vec<u64>], p: u64) -> usize {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(pivot) = (rank..n_rows).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = pow_mod(rows[rank][col], p - 2, p);
        let (top, bottom) = rows.split_at_mut(rank + 1);
        let prow = &top[rank];
        for row in bottom.iter_mut() {
            if row[col] == 0 {
                continue;
            }
            let f = mul_mod(row[col], inv, p);
            for c in col..n_cols {
                if prow[c] != 0 {
                    row[c] = (row[c] + p - mul_mod(f, prow[c], p)) % p;
                }
            }
        }
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    rank
}
