//! Topology diagnostics: degree heterogeneity, disconnection under random
//! removal, degree distributions and basic features.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Side};
use crate::rng;

/// `<k^2> / <k>^2` of one degree side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Heterogeneity {
    pub value: f64,
    pub side: Side,
}

pub(crate) fn heterogeneity_from_sums(n: usize, sum: u64, sum_sq: u64) -> Option<f64> {
    if n == 0 || sum == 0 {
        return None;
    }
    let mean = sum as f64 / n as f64;
    Some((sum_sq as f64 / n as f64) / (mean * mean))
}

pub fn heterogeneity_of(degrees: &[usize]) -> Option<f64> {
    let sum: u64 = degrees.iter().map(|&k| k as u64).sum();
    let sum_sq: u64 = degrees.iter().map(|&k| (k * k) as u64).sum();
    heterogeneity_from_sums(degrees.len(), sum, sum_sq)
}

pub fn heterogeneity(g: &DirectedGraph, side: Side) -> Result<Heterogeneity> {
    let value = heterogeneity_of(&g.degree_sequence(side))
        .ok_or(Error::Degenerate("heterogeneity needs at least one edge"))?;
    Ok(Heterogeneity { value, side })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityPoint {
    pub removed: usize,
    pub proportion: f64,
    /// Mean over the runs where `<k> > 0`; `None` when no run had edges left.
    pub mean: Option<f64>,
    pub defined_runs: usize,
}

/// Mean heterogeneity of the survivors after `0..N-1` random removals.
pub fn heterogeneity_curve(
    g: &DirectedGraph,
    seed: u64,
    runs: usize,
    side: Side,
) -> Result<Vec<HeterogeneityPoint>> {
    let n = g.node_count();
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Degenerate("heterogeneity curve of an empty graph"));
    }
    let per_run: Vec<Vec<Option<f64>>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng::stream(seed, rng::DOMAIN_HETEROGENEITY, run as u64);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            heterogeneity_trace(g, &order[..n - 1], side)
        })
        .collect();
    Ok((0..n)
        .map(|removed| {
            let defined: Vec<f64> = per_run.iter().filter_map(|r| r[removed]).collect();
            HeterogeneityPoint {
                removed,
                proportion: removed as f64 / n as f64,
                mean: (!defined.is_empty())
                    .then(|| defined.iter().sum::<f64>() / defined.len() as f64),
                defined_runs: defined.len(),
            }
        })
        .collect())
}

/// Heterogeneity before any removal and after each removal in `order`.
pub(crate) fn heterogeneity_trace(
    g: &DirectedGraph,
    order: &[usize],
    side: Side,
) -> Vec<Option<f64>> {
    let n = g.node_count();
    let mut deg = g.degree_sequence(side);
    let mut alive = vec![true; n];
    let mut sum: u64 = deg.iter().map(|&k| k as u64).sum();
    let mut sum_sq: u64 = deg.iter().map(|&k| (k * k) as u64).sum();
    let mut out = Vec::with_capacity(order.len() + 1);
    out.push(heterogeneity_from_sums(n, sum, sum_sq));
    for (step, &v) in order.iter().enumerate() {
        alive[v] = false;
        sum -= deg[v] as u64;
        sum_sq -= (deg[v] * deg[v]) as u64;
        deg[v] = 0;
        // removing v lowers the counted degree of neighbours on the other side
        let touched = match side {
            Side::Out => g.in_neighbors(v),
            Side::In => g.out_neighbors(v),
        };
        for &w in touched {
            if alive[w] {
                let k = deg[w];
                sum -= 1;
                sum_sq -= (2 * k - 1) as u64;
                deg[w] = k - 1;
            }
        }
        out.push(heterogeneity_from_sums(n - step - 1, sum, sum_sq));
    }
    out
}

/// Five-number summary with 1.5 IQR whiskers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotStats {
    /// Smallest value inside the lower whisker.
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Largest value inside the upper whisker.
    pub max: f64,
    pub outliers: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn boxplot(values: &[f64]) -> Option<BoxplotStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| (lo..=hi).contains(v)).collect();
    Some(BoxplotStats {
        min: *inside.first().unwrap_or(&q1),
        q1,
        median,
        q3,
        max: *inside.last().unwrap_or(&q3),
        outliers: sorted.iter().copied().filter(|v| !(lo..=hi).contains(v)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisconnectionSummary {
    /// Removals needed to disconnect, per run.
    pub removals: Vec<usize>,
    /// `removals / N`, per run.
    pub proportions: Vec<f64>,
    pub boxplot: BoxplotStats,
}

/// Smallest number of removals along `order` after which the survivors are
/// weakly disconnected. Survivor graphs with one node count as connected, so
/// a run that never disconnects reports `order.len()`.
pub fn removals_to_disconnect(g: &DirectedGraph, order: &[usize]) -> usize {
    let n = g.node_count();
    if g.weak_component_count() > 1 {
        return 0;
    }
    // add nodes back in reverse removal order and track component counts
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut present = vec![false; n];
    let removed_set: Vec<bool> = {
        let mut r = vec![false; n];
        order.iter().for_each(|&v| r[v] = true);
        r
    };
    let mut components = 0usize;
    let mut add = |v: usize, present: &mut Vec<bool>, parent: &mut Vec<usize>| {
        present[v] = true;
        components += 1;
        for &w in g.out_neighbors(v).iter().chain(g.in_neighbors(v)) {
            if present[w] {
                let (a, b) = (find(parent, v), find(parent, w));
                if a != b {
                    parent[a] = b;
                    components -= 1;
                }
            }
        }
        components
    };
    let mut comps_after = vec![0usize; order.len() + 1];
    let mut last = 0;
    for v in (0..n).filter(|&v| !removed_set[v]) {
        last = add(v, &mut present, &mut parent);
    }
    comps_after[order.len()] = last;
    for i in (0..order.len()).rev() {
        comps_after[i] = add(order[i], &mut present, &mut parent);
    }
    (1..=order.len())
        .find(|&i| n - i >= 2 && comps_after[i] > 1)
        .unwrap_or(order.len())
}

pub fn disconnection_threshold(
    g: &DirectedGraph,
    seed: u64,
    runs: usize,
) -> Result<DisconnectionSummary> {
    let n = g.node_count();
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Degenerate("disconnection of an empty graph"));
    }
    let removals: Vec<usize> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng::stream(seed, rng::DOMAIN_DISCONNECT, run as u64);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            removals_to_disconnect(g, &order[..n - 1])
        })
        .collect();
    let proportions: Vec<f64> = removals.iter().map(|&i| i as f64 / n as f64).collect();
    let boxplot = boxplot(&proportions).expect("runs >= 1");
    Ok(DisconnectionSummary {
        removals,
        proportions,
        boxplot,
    })
}

/// Histogram `degree -> node count`.
pub fn degree_distribution(g: &DirectedGraph, side: Side) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for k in g.degree_sequence(side) {
        *hist.entry(k).or_insert(0) += 1;
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureBundle {
    pub average_degree: f64,
    /// Mean shortest-path length; infinite if some ordered pair is unreachable.
    pub average_path_length: f64,
    /// Mean directed shortest-path length over reachable ordered pairs only.
    pub reachable_path_length: Option<f64>,
    pub average_betweenness: f64,
    pub clustering: f64,
    pub h_out: Option<f64>,
    pub h_in: Option<f64>,
}

/// Unnormalized directed betweenness (Brandes), endpoints excluded, together
/// with the total distance and count of reachable ordered pairs.
pub fn betweenness(g: &DirectedGraph) -> (Vec<f64>, u64, u64) {
    let n = g.node_count();
    let per_source: Vec<(Vec<f64>, u64, u64)> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut bc = vec![0.0; n];
            let mut sigma = vec![0f64; n];
            let mut dist = vec![usize::MAX; n];
            let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut stack = Vec::with_capacity(n);
            let mut queue = VecDeque::new();
            sigma[s] = 1.0;
            dist[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                stack.push(v);
                for &w in g.out_neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            let mut delta = vec![0.0; n];
            while let Some(w) = stack.pop() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    bc[w] += delta[w];
                }
            }
            let reach = dist.iter().filter(|&&d| d != usize::MAX && d > 0);
            let (total, count) = reach.fold((0u64, 0u64), |(t, c), &d| (t + d as u64, c + 1));
            (bc, total, count)
        })
        .collect();
    let mut bc = vec![0.0; n];
    let (mut total, mut count) = (0, 0);
    for (b, t, c) in per_source {
        bc.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        total += t;
        count += c;
    }
    (bc, total, count)
}

/// Global clustering (transitivity) of the undirected shadow.
pub fn clustering(g: &DirectedGraph) -> f64 {
    let n = g.node_count();
    let nb: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut l: Vec<usize> = g.out_neighbors(v).iter().chain(g.in_neighbors(v)).copied().collect();
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    let mut closed = 0u64;
    let mut triples = 0u64;
    for v in 0..n {
        let d = nb[v].len() as u64;
        triples += d * d.saturating_sub(1) / 2;
        for &u in &nb[v] {
            // each triangle at v counted once per ordered neighbour pair
            let (a, b) = (&nb[v], &nb[u]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        closed += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    // closed counts each (v, u, w) twice per centre v
    if triples == 0 {
        0.0
    } else {
        (closed as f64 / 2.0) / triples as f64
    }
}

pub fn basic_features(g: &DirectedGraph) -> Result<FeatureBundle> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Degenerate("features of an empty graph"));
    }
    let (bc, total, count) = betweenness(g);
    let pairs = (n * (n - 1)) as u64;
    let reachable_path_length = (count > 0).then(|| total as f64 / count as f64);
    let average_path_length = if count < pairs {
        f64::INFINITY
    } else {
        reachable_path_length.unwrap_or(0.0)
    };
    Ok(FeatureBundle {
        average_degree: g.edge_count() as f64 / n as f64,
        average_path_length,
        reachable_path_length,
        average_betweenness: bc.iter().sum::<f64>() / n as f64,
        clustering: clustering(g),
        h_out: heterogeneity_of(&g.degree_sequence(Side::Out)),
        h_in: heterogeneity_of(&g.degree_sequence(Side::In)),
    })
}
