//! Controllability curves under node-removal attacks.
//!
//! After `i` removals the curve holds `n_D(i) = N_D(i) / (N - i)`, for
//! `i = 1..N-1`; `R_c` is the mean of the curve. Exhaustive scores are kept as
//! exact rationals so ties between instances are detected exactly.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controllability::{adjacency_rank, out_lists, Criterion, Matcher};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::rng::{self, StreamRng};

/// Largest graph for which the `N!` permutation mode is allowed.
pub const MAX_PERMUTATION_NODES: usize = 7;
/// Largest graph for which the `2^N` subset mode is allowed.
pub const MAX_SUBSET_NODES: usize = 20;

/// Ordered removals of `N - 1` distinct original node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackSequence(Vec<usize>);

impl AttackSequence {
    pub fn new(order: Vec<usize>, node_count: usize) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::Degenerate("attacks need at least two nodes"));
        }
        if order.len() != node_count - 1 {
            return Err(Error::InvalidSequence(format!(
                "expected {} removals, got {}",
                node_count - 1,
                order.len()
            )));
        }
        let mut seen = vec![false; node_count];
        for &v in &order {
            if v >= node_count {
                return Err(Error::InvalidSequence(format!("node {v} out of range")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidSequence(format!("node {v} repeated")));
            }
        }
        Ok(AttackSequence(order))
    }

    /// Uniformly random removal order.
    pub fn random(node_count: usize, rng: &mut StreamRng) -> Result<Self> {
        let mut order: Vec<usize> = (0..node_count).collect();
        order.shuffle(rng);
        order.pop();
        Self::new(order, node_count)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Driver counts after each removal of one attack sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllabilityCurve {
    node_count: usize,
    driver_counts: Vec<usize>,
    criterion: Criterion,
}

impl ControllabilityCurve {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    /// `N_D(i)` for `i = 1..N-1`.
    pub fn driver_counts(&self) -> &[usize] {
        &self.driver_counts
    }

    pub fn len(&self) -> usize {
        self.driver_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.driver_counts.is_empty()
    }

    /// `n_D(i)` as exact fractions.
    pub fn values(&self) -> Vec<Ratio<u64>> {
        self.driver_counts
            .iter()
            .enumerate()
            .map(|(k, &d)| Ratio::new(d as u64, (self.node_count - k - 1) as u64))
            .collect()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.driver_counts
            .iter()
            .enumerate()
            .map(|(k, &d)| d as f64 / (self.node_count - k - 1) as f64)
            .collect()
    }

    /// Exact mean of the curve.
    pub fn rc_exact(&self) -> BigRational {
        let mut sum = BigRational::zero();
        for v in self.values() {
            sum += BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()));
        }
        sum / BigRational::from_integer(BigInt::from(self.len()))
    }

    pub fn rc(&self) -> Result<RobustnessScore> {
        rc(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExhaustiveMode {
    Permutations,
    Subsets,
}

impl fmt::Display for ExhaustiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExhaustiveMode::Permutations => "permutations",
            ExhaustiveMode::Subsets => "subsets",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    SingleSequence,
    MonteCarlo { runs: usize, std: f64 },
    Exhaustive(ExhaustiveMode),
}

/// `R_c` or `<R_c>`; `exact` is present whenever it was computed in rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessScore {
    pub value: f64,
    pub exact: Option<BigRational>,
    pub provenance: Provenance,
}

impl RobustnessScore {
    fn from_exact(exact: BigRational, provenance: Provenance) -> Self {
        RobustnessScore {
            value: exact.to_f64().unwrap_or(f64::NAN),
            exact: Some(exact),
            provenance,
        }
    }
}

/// Mean of the curve values.
pub fn rc(curve: &ControllabilityCurve) -> Result<RobustnessScore> {
    if curve.is_empty() {
        return Err(Error::Degenerate("R_c of an empty curve"));
    }
    Ok(RobustnessScore::from_exact(
        curve.rc_exact(),
        Provenance::SingleSequence,
    ))
}

/// Tracks `N_D` of the surviving subgraph while nodes are deleted one by one.
pub(crate) struct DriverTracker<'g> {
    graph: &'g DirectedGraph,
    adj: Vec<Vec<usize>>,
    alive: Vec<bool>,
    alive_count: usize,
    matcher: Matcher,
    criterion: Criterion,
}

impl<'g> DriverTracker<'g> {
    pub(crate) fn new(graph: &'g DirectedGraph, criterion: Criterion) -> Self {
        let n = graph.node_count();
        let adj = out_lists(graph);
        let alive = vec![true; n];
        let mut matcher = Matcher::new(n);
        if criterion == Criterion::Structural {
            matcher.augment(&adj, &alive);
        }
        DriverTracker {
            graph,
            adj,
            alive,
            alive_count: n,
            matcher,
            criterion,
        }
    }

    pub(crate) fn remove(&mut self, v: usize) {
        debug_assert!(self.alive[v]);
        self.alive[v] = false;
        self.alive_count -= 1;
        if self.criterion == Criterion::Structural {
            self.matcher.release(v);
            self.matcher.augment(&self.adj, &self.alive);
        }
    }

    pub(crate) fn drivers(&self) -> usize {
        let matched = match self.criterion {
            Criterion::Structural => self.matcher.size(),
            Criterion::Exact => adjacency_rank(&self.graph.induced_subgraph(&self.alive)),
        };
        (self.alive_count - matched).max(1)
    }
}

/// Driver counts along `sequence`, indexed by original node ids.
pub fn curve(
    g: &DirectedGraph,
    sequence: &AttackSequence,
    criterion: Criterion,
) -> Result<ControllabilityCurve> {
    let n = g.node_count();
    if sequence.as_slice().len() + 1 != n {
        // re-validate against this graph
        AttackSequence::new(sequence.as_slice().to_vec(), n)?;
    }
    let mut tracker = DriverTracker::new(g, criterion);
    let driver_counts = sequence
        .as_slice()
        .iter()
        .map(|&v| {
            tracker.remove(v);
            tracker.drivers()
        })
        .collect();
    Ok(ControllabilityCurve {
        node_count: n,
        driver_counts,
        criterion,
    })
}

/// Per-step statistics over independent random attacks.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomAttackSummary {
    pub node_count: usize,
    pub runs: usize,
    /// Mean `n_D(i)` for `i = 1..N-1`.
    pub mean: Vec<f64>,
    /// Population standard deviation of `n_D(i)`.
    pub std: Vec<f64>,
    /// `R_c` of every run, in run order.
    pub run_scores: Vec<f64>,
    pub mean_rc: RobustnessScore,
}

/// Monte Carlo random attacks; run `k` uses stream `k` of `seed`.
pub fn random_attack(
    g: &DirectedGraph,
    runs: usize,
    seed: u64,
    criterion: Criterion,
) -> Result<RandomAttackSummary> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Degenerate("attacks need at least two nodes"));
    }
    let curves: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = rng::stream(seed, rng::DOMAIN_ATTACK, run as u64);
            let seq = AttackSequence::random(n, &mut rng)?;
            Ok(curve(g, &seq, criterion)?.values_f64())
        })
        .collect::<Result<_>>()?;
    Ok(summarize_curves(n, &curves))
}

pub(crate) fn summarize_curves(n: usize, curves: &[Vec<f64>]) -> RandomAttackSummary {
    let runs = curves.len();
    let steps = n - 1;
    let mut mean = vec![0.0; steps];
    let mut std = vec![0.0; steps];
    for c in curves {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= runs as f64);
    for c in curves {
        for ((s, v), m) in std.iter_mut().zip(c).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    std.iter_mut().for_each(|s| *s = (*s / runs as f64).sqrt());
    let run_scores: Vec<f64> = curves
        .iter()
        .map(|c| c.iter().sum::<f64>() / steps as f64)
        .collect();
    let rc_mean = run_scores.iter().sum::<f64>() / runs as f64;
    let rc_std = (run_scores
        .iter()
        .map(|r| (r - rc_mean) * (r - rc_mean))
        .sum::<f64>()
        / runs as f64)
        .sqrt();
    RandomAttackSummary {
        node_count: n,
        runs,
        mean,
        std,
        run_scores,
        mean_rc: RobustnessScore {
            value: rc_mean,
            exact: None,
            provenance: Provenance::MonteCarlo { runs, std: rc_std },
        },
    }
}

/// `<R_c>` over every removal order.
pub fn exhaustive_rc(
    g: &DirectedGraph,
    mode: ExhaustiveMode,
    criterion: Criterion,
) -> Result<RobustnessScore> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Degenerate("attacks need at least two nodes"));
    }
    let exact = match mode {
        ExhaustiveMode::Permutations => permutation_average(g, criterion)?,
        ExhaustiveMode::Subsets => {
            let curve = exhaustive_mean_curve(g, criterion)?;
            let len = BigRational::from_integer(BigInt::from(curve.len()));
            curve.into_iter().sum::<BigRational>() / len
        }
    };
    Ok(RobustnessScore::from_exact(exact, Provenance::Exhaustive(mode)))
}

fn permutation_average(g: &DirectedGraph, criterion: Criterion) -> Result<BigRational> {
    let n = g.node_count();
    if n > MAX_PERMUTATION_NODES {
        return Err(Error::BudgetExceeded(format!(
            "permutation mode needs N <= {MAX_PERMUTATION_NODES}, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut total = BigRational::zero();
    let mut count = 0u64;
    let mut visit = |order: &[usize]| -> Result<()> {
        let seq = AttackSequence::new(order[..n - 1].to_vec(), n)?;
        total += curve(g, &seq, criterion)?.rc_exact();
        count += 1;
        Ok(())
    };
    // Heap's algorithm
    let mut c = vec![0usize; n];
    visit(&order)?;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            visit(&order)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total / BigRational::from_integer(BigInt::from(count)))
}

/// Exact `E[n_D(i)]` for `i = 1..N-1` when every removal order is equally likely.
///
/// At step `i` every `i`-subset of removed nodes is equally likely, so the
/// expectation is the average of `N_D / (N - i)` over all such subsets.
pub fn exhaustive_mean_curve(g: &DirectedGraph, criterion: Criterion) -> Result<Vec<BigRational>> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Degenerate("attacks need at least two nodes"));
    }
    if n > MAX_SUBSET_NODES {
        return Err(Error::BudgetExceeded(format!(
            "subset mode needs N <= {MAX_SUBSET_NODES}, got {n}"
        )));
    }
    let sums = driver_sums_by_survivors(g, criterion);
    Ok((1..n)
        .map(|removed| {
            let survivors = n - removed;
            let denom = binomial(n as u64, removed as u64) * survivors as u64;
            BigRational::new(BigInt::from(sums[survivors]), BigInt::from(denom))
        })
        .collect())
}

/// `sums[k]` = total `N_D` over all survivor sets of size `k`.
fn driver_sums_by_survivors(g: &DirectedGraph, criterion: Criterion) -> Vec<u64> {
    let n = g.node_count();
    let adj = out_lists(g);
    let full = 1u32 << n;
    let chunk = 1u32 << n.saturating_sub(6).min(12);
    let partials: Vec<Vec<u64>> = (1..full)
        .step_by(chunk as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let mut sums = vec![0u64; n + 1];
            let mut alive = vec![false; n];
            for mask in start..(start + chunk).min(full) {
                let k = mask.count_ones() as usize;
                if k == n {
                    continue;
                }
                for (v, a) in alive.iter_mut().enumerate() {
                    *a = mask & (1 << v) != 0;
                }
                let matched = match criterion {
                    Criterion::Structural => {
                        let mut m = Matcher::new(n);
                        m.augment(&adj, &alive);
                        m.size()
                    }
                    Criterion::Exact => adjacency_rank(&g.induced_subgraph(&alive)),
                };
                sums[k] += (k - matched).max(1) as u64;
            }
            sums
        })
        .collect();
    let mut sums = vec![0u64; n + 1];
    for p in partials {
        for (s, x) in sums.iter_mut().zip(p) {
            *s += x;
        }
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn random_graph(rng: &mut StreamRng, n: usize, p: f64) -> DirectedGraph {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v)
            .filter(|_| rng.random_bool(p))
            .collect();
        DirectedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn cycle_curve_matches_hand_computation() {
        let g = DirectedGraph::cycle(6);
        let s = AttackSequence::new(vec![0, 1, 2, 3, 4], 6).unwrap();
        let c = curve(&g, &s, Criterion::Structural).unwrap();
        let expect = [(1, 5), (1, 4), (1, 3), (1, 2), (1, 1)];
        let got: Vec<_> = c.values().iter().map(|r| (*r.numer(), *r.denom())).collect();
        assert_eq!(got, expect);
        // 1/5 + 1/4 + 1/3 + 1/2 + 1 = 137/60, divided by 5
        assert_eq!(rc(&c).unwrap().exact.unwrap(), q(137, 300));
    }

    #[test]
    fn trivial_curves() {
        let g = DirectedGraph::from_edges(2, [(0, 1)]).unwrap();
        let s = AttackSequence::new(vec![0], 2).unwrap();
        assert_eq!(curve(&g, &s, Criterion::Structural).unwrap().driver_counts(), [1]);

        let empty = DirectedGraph::empty(4);
        let s = AttackSequence::new(vec![2, 0, 3], 4).unwrap();
        let c = curve(&empty, &s, Criterion::Structural).unwrap();
        assert!(c.values().iter().all(|v| *v == Ratio::from_integer(1)));
        assert_eq!(rc(&c).unwrap().value, 1.0);
    }

    #[test]
    fn rc_of_half_curve() {
        let c = ControllabilityCurve {
            node_count: 3,
            driver_counts: vec![1, 1],
            criterion: Criterion::Structural,
        };
        assert_eq!(rc(&c).unwrap().exact.unwrap(), q(3, 4));
    }

    #[test]
    fn invalid_sequences() {
        assert!(AttackSequence::new(vec![0, 0], 3).is_err());
        assert!(AttackSequence::new(vec![0, 3], 3).is_err());
        assert!(AttackSequence::new(vec![0], 3).is_err());
        assert!(AttackSequence::new(vec![], 1).is_err());
    }

    #[test]
    fn curves_end_at_one() {
        let mut rng = rng::from_seed(9);
        for _ in 0..50 {
            let n = rng.random_range(2..=12);
            let g = random_graph(&mut rng, n, 0.3);
            let s = AttackSequence::random(n, &mut rng).unwrap();
            for crit in [Criterion::Structural, Criterion::Exact] {
                let c = curve(&g, &s, crit).unwrap();
                assert_eq!(*c.values().last().unwrap(), Ratio::from_integer(1));
            }
        }
    }

    #[test]
    fn random_attack_single_run_equals_curve() {
        let g = DirectedGraph::from_edges(5, [(0, 1), (1, 2), (2, 0), (3, 4), (0, 3)]).unwrap();
        let summary = random_attack(&g, 1, 42, Criterion::Structural).unwrap();
        let mut r = rng::stream(42, rng::DOMAIN_ATTACK, 0);
        let s = AttackSequence::random(5, &mut r).unwrap();
        let c = curve(&g, &s, Criterion::Structural).unwrap();
        assert_eq!(summary.mean, c.values_f64());
        assert!(summary.std.iter().all(|&s| s == 0.0));
        assert_eq!(summary.mean_rc.value, rc(&c).unwrap().value);
    }

    #[test]
    fn random_attack_is_deterministic() {
        let g = DirectedGraph::cycle(8);
        let a = random_attack(&g, 20, 5, Criterion::Structural).unwrap();
        let b = random_attack(&g, 20, 5, Criterion::Structural).unwrap();
        assert_eq!(a, b);
        assert!(random_attack(&g, 0, 5, Criterion::Structural).is_err());
    }

    #[test]
    fn random_attack_on_cycle_approaches_expectation() {
        // E[n_D(i)] = i / (N - 1) for the directed N-cycle
        let g = DirectedGraph::cycle(6);
        let s = random_attack(&g, 20_000, 1, Criterion::Structural).unwrap();
        for (i, m) in s.mean.iter().enumerate() {
            let expect = (i + 1) as f64 / 5.0;
            assert!((m - expect).abs() < 0.01, "step {} mean {m}", i + 1);
        }
        assert!(s.mean.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exhaustive_cycle_closed_form() {
        for n in 3..=7usize {
            let g = DirectedGraph::cycle(n);
            let expect = q(n as i64, 2 * (n as i64 - 1));
            for mode in [ExhaustiveMode::Permutations, ExhaustiveMode::Subsets] {
                let s = exhaustive_rc(&g, mode, Criterion::Structural).unwrap();
                assert_eq!(s.exact.unwrap(), expect, "n={n} {mode}");
            }
        }
        let s = exhaustive_rc(&DirectedGraph::cycle(6), ExhaustiveMode::Subsets, Criterion::Structural)
            .unwrap();
        assert!((s.value - 0.6).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_two_nodes_is_one() {
        let g = DirectedGraph::from_edges(2, [(0, 1)]).unwrap();
        for mode in [ExhaustiveMode::Permutations, ExhaustiveMode::Subsets] {
            let s = exhaustive_rc(&g, mode, Criterion::Structural).unwrap();
            assert!(s.exact.unwrap().is_one());
        }
    }

    #[test]
    fn exhaustive_modes_agree() {
        let mut rng = rng::from_seed(77);
        for _ in 0..40 {
            let n = rng.random_range(2..=6);
            let p = rng.random_range(0.1..0.7);
            let g = random_graph(&mut rng, n, p);
            for crit in [Criterion::Structural, Criterion::Exact] {
                let a = exhaustive_rc(&g, ExhaustiveMode::Permutations, crit).unwrap();
                let b = exhaustive_rc(&g, ExhaustiveMode::Subsets, crit).unwrap();
                assert_eq!(a.exact, b.exact);
            }
        }
    }

    #[test]
    fn exhaustive_is_isomorphism_invariant() {
        let mut rng = rng::from_seed(13);
        for _ in 0..20 {
            let n = rng.random_range(3..=7);
            let g = random_graph(&mut rng, n, 0.35);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let h = g.relabel(&perm).unwrap();
            let a = exhaustive_rc(&g, ExhaustiveMode::Subsets, Criterion::Structural).unwrap();
            let b = exhaustive_rc(&h, ExhaustiveMode::Subsets, Criterion::Structural).unwrap();
            assert_eq!(a.exact, b.exact);
        }
    }

    #[test]
    fn exhaustive_budgets() {
        let g = DirectedGraph::cycle(8);
        assert!(matches!(
            exhaustive_rc(&g, ExhaustiveMode::Permutations, Criterion::Structural),
            Err(Error::BudgetExceeded(_))
        ));
        let big = DirectedGraph::cycle(21);
        assert!(matches!(
            exhaustive_rc(&big, ExhaustiveMode::Subsets, Criterion::Structural),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
