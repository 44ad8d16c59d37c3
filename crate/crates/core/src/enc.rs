//! The degree-band condition and random edge rectification.
//!
//! A graph with `N` nodes and `M` edges satisfies the condition when every in-
//! and out-degree lies in `[floor(M/N), ceil(M/N)]`. Rectification moves one
//! endpoint of one edge at a time to push violating degrees into the band:
//!
//! 1. out-degree too low: take an out-edge `k -> l` of an over-full node `k`,
//!    replace it by `i -> l`;
//! 2. out-degree too high: move an out-edge `i -> j` to `k -> j` for an
//!    under-full `k`;
//! 3. in-degree too low: take an in-edge `l -> k` of an over-full `k`, replace
//!    it by `l -> i`;
//! 4. in-degree too high: move an in-edge `j -> i` to `j -> k` for an
//!    under-full `k`.
//!
//! When no counterpart strictly outside the band exists (possible when `N`
//! does not divide `M`), the counterpart is drawn from nodes that can give or
//! take one unit without leaving the band.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, EdgeSet, Side};
use crate::rng::{self, StreamRng};

/// Internal cap used for the `unlimited` budget.
pub const UNLIMITED_OPERATIONS: u64 = 1_000_000_000;

/// Proposals drawn before falling back to scanning every legal move.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncBounds {
    pub lower: usize,
    pub upper: usize,
}

impl EncBounds {
    pub fn contains(&self, degree: usize) -> bool {
        (self.lower..=self.upper).contains(&degree)
    }

    /// Distance of `degree` from the band.
    pub fn excess(&self, degree: usize) -> usize {
        self.lower.saturating_sub(degree) + degree.saturating_sub(self.upper)
    }
}

/// `(floor(M/N), ceil(M/N))`.
pub fn enc_bounds(n: usize, m: usize) -> Result<EncBounds> {
    if n == 0 {
        return Err(Error::Degenerate("degree bounds of a graph with no nodes"));
    }
    Ok(EncBounds {
        lower: m / n,
        upper: m.div_ceil(n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub node: usize,
    pub side: Side,
    pub degree: usize,
    pub bound: BoundKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncReport {
    pub bounds: EncBounds,
    pub satisfied: bool,
    pub violations: Vec<Violation>,
}

impl EncReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }
}

pub fn check_enc(g: &DirectedGraph) -> Result<EncReport> {
    let bounds = enc_bounds(g.node_count(), g.edge_count())?;
    let mut violations = Vec::new();
    for node in 0..g.node_count() {
        for (side, degree) in [(Side::In, g.in_degree(node)), (Side::Out, g.out_degree(node))] {
            if degree < bounds.lower {
                violations.push(Violation {
                    node,
                    side,
                    degree,
                    bound: BoundKind::Lower,
                });
            } else if degree > bounds.upper {
                violations.push(Violation {
                    node,
                    side,
                    degree,
                    bound: BoundKind::Upper,
                });
            }
        }
    }
    Ok(EncReport {
        bounds,
        satisfied: violations.is_empty(),
        violations,
    })
}

/// Total distance of all in- and out-degrees from the band.
pub fn violation_mass(g: &DirectedGraph) -> Result<usize> {
    let bounds = enc_bounds(g.node_count(), g.edge_count())?;
    Ok((0..g.node_count())
        .map(|v| bounds.excess(g.in_degree(v)) + bounds.excess(g.out_degree(v)))
        .sum())
}

/// One applied rectification: rule 1-4, the edge removed and the edge added.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RerOperation {
    pub rule: u8,
    pub deleted: (usize, usize),
    pub added: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReason {
    EncSatisfied,
    BudgetExhausted,
    Stalled,
}

impl fmt::Display for TerminalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalReason::EncSatisfied => "enc-satisfied",
            TerminalReason::BudgetExhausted => "budget-exhausted",
            TerminalReason::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RerTrace {
    pub operations: Vec<RerOperation>,
    pub reason: TerminalReason,
}

impl RerTrace {
    pub fn operations_applied(&self) -> usize {
        self.operations.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BudgetRepr", into = "String")]
pub enum RerBudget {
    Limited(u64),
    Unlimited,
}

impl RerBudget {
    pub fn max_operations(self) -> u64 {
        match self {
            RerBudget::Limited(n) => n,
            RerBudget::Unlimited => UNLIMITED_OPERATIONS,
        }
    }
}

impl fmt::Display for RerBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RerBudget::Limited(n) => write!(f, "{n}"),
            RerBudget::Unlimited => f.write_str("unlimited"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BudgetRepr {
    Count(u64),
    Text(String),
}

impl TryFrom<BudgetRepr> for RerBudget {
    type Error = Error;

    fn try_from(r: BudgetRepr) -> Result<Self> {
        match r {
            BudgetRepr::Count(n) => Ok(RerBudget::Limited(n)),
            BudgetRepr::Text(s) => s.parse(),
        }
    }
}

impl From<RerBudget> for String {
    fn from(b: RerBudget) -> String {
        b.to_string()
    }
}

impl std::str::FromStr for RerBudget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unlimited" | "inf" | "Inf" => Ok(RerBudget::Unlimited),
            other => other
                .parse()
                .map(RerBudget::Limited)
                .map_err(|_| Error::InvalidParameter(format!("bad RER budget {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Target {
    node: usize,
    side: Side,
    too_low: bool,
}

struct Rectifier {
    edges: EdgeSet,
    bounds: EncBounds,
}

impl Rectifier {
    fn new(g: &DirectedGraph) -> Result<Self> {
        Ok(Rectifier {
            edges: g.to_edge_set(),
            bounds: enc_bounds(g.node_count(), g.edge_count())?,
        })
    }

    fn targets(&self) -> Vec<Target> {
        let b = self.bounds;
        let mut out = Vec::new();
        for node in 0..self.edges.node_count() {
            for side in [Side::Out, Side::In] {
                let d = self.edges.degree(side, node);
                if d < b.lower || d > b.upper {
                    out.push(Target {
                        node,
                        side,
                        too_low: d < b.lower,
                    });
                }
            }
        }
        out
    }

    fn is_satisfied(&self) -> bool {
        let b = self.bounds;
        (0..self.edges.node_count()).all(|v| {
            b.contains(self.edges.out_degree(v)) && b.contains(self.edges.in_degree(v))
        })
    }

    /// Counterpart nodes, strict tier first: givers above the band (or above
    /// the lower bound), takers below the band (or below the upper bound).
    fn counterpart_tiers(&self, side: Side, giver: bool, exclude: usize) -> [Vec<usize>; 2] {
        let b = self.bounds;
        let n = self.edges.node_count();
        let pick = |f: &dyn Fn(usize) -> bool| -> Vec<usize> {
            (0..n)
                .filter(|&k| k != exclude && f(self.edges.degree(side, k)))
                .collect()
        };
        if giver {
            [pick(&|d| d > b.upper), pick(&|d| d > b.lower && d <= b.upper)]
        } else {
            [pick(&|d| d < b.lower), pick(&|d| d >= b.lower && d < b.upper)]
        }
    }

    fn step(&mut self, rng: &mut StreamRng) -> Result<RerOperation> {
        let mut targets = self.targets();
        if targets.is_empty() {
            return Err(Error::AlreadySatisfied);
        }
        targets.shuffle(rng);
        for t in targets {
            if let Some(op) = self.propose(t, rng) {
                self.edges.remove(op.deleted.0, op.deleted.1);
                self.edges.insert(op.added.0, op.added.1);
                return Ok(op);
            }
        }
        Err(Error::Stalled)
    }

    fn propose(&self, t: Target, rng: &mut StreamRng) -> Option<RerOperation> {
        let i = t.node;
        let e = &self.edges;
        let tiers = self.counterpart_tiers(t.side, t.too_low, i);
        for tier in tiers.iter().filter(|tier| !tier.is_empty()) {
            // candidate (counterpart, edge) pairs with their legality test
            let moves: Box<dyn Fn(usize) -> Vec<RerOperation>> = match (t.side, t.too_low) {
                // rule 1: k -> l becomes i -> l
                (Side::Out, true) => Box::new(move |k| {
                    e.out_neighbors(k)
                        .iter()
                        .map(|&l| RerOperation {
                            rule: 1,
                            deleted: (k, l),
                            added: (i, l),
                        })
                        .collect()
                }),
                // rule 2: i -> j becomes k -> j
                (Side::Out, false) => Box::new(move |k| {
                    e.out_neighbors(i)
                        .iter()
                        .map(|&j| RerOperation {
                            rule: 2,
                            deleted: (i, j),
                            added: (k, j),
                        })
                        .collect()
                }),
                // rule 3: l -> k becomes l -> i
                (Side::In, true) => Box::new(move |k| {
                    e.in_neighbors(k)
                        .iter()
                        .map(|&l| RerOperation {
                            rule: 3,
                            deleted: (l, k),
                            added: (l, i),
                        })
                        .collect()
                }),
                // rule 4: j -> i becomes j -> k
                (Side::In, false) => Box::new(move |k| {
                    e.in_neighbors(i)
                        .iter()
                        .map(|&j| RerOperation {
                            rule: 4,
                            deleted: (j, i),
                            added: (j, k),
                        })
                        .collect()
                }),
            };
            let legal = |op: &RerOperation| {
                let (a, b) = op.added;
                a != b && !e.contains(a, b)
            };
            for _ in 0..MAX_RESAMPLES {
                let k = tier[rng.random_range(0..tier.len())];
                let options = moves(k);
                if options.is_empty() {
                    continue;
                }
                let op = options[rng.random_range(0..options.len())];
                if legal(&op) {
                    return Some(op);
                }
            }
            let all: Vec<RerOperation> = tier
                .iter()
                .flat_map(|&k| moves(k))
                .filter(|op| legal(op))
                .collect();
            if !all.is_empty() {
                return Some(all[rng.random_range(0..all.len())]);
            }
        }
        None
    }
}

/// Applies one rectification to a graph violating the condition.
pub fn rer_step(g: &DirectedGraph, rng: &mut StreamRng) -> Result<(DirectedGraph, RerOperation)> {
    let mut r = Rectifier::new(g)?;
    let op = r.step(rng)?;
    Ok((r.edges.freeze(), op))
}

/// Rectifies until the condition holds, the budget runs out or no legal move
/// is left.
pub fn rectify(g: &DirectedGraph, budget: RerBudget, seed: u64) -> Result<(DirectedGraph, RerTrace)> {
    let mut rng = rng::stream(seed, rng::DOMAIN_RECTIFY, 0);
    let mut r = Rectifier::new(g)?;
    let cap = budget.max_operations();
    let mut operations = Vec::new();
    let mut reason = TerminalReason::BudgetExhausted;
    while (operations.len() as u64) < cap {
        match r.step(&mut rng) {
            Ok(op) => operations.push(op),
            Err(Error::AlreadySatisfied) => break,
            Err(Error::Stalled) => {
                reason = TerminalReason::Stalled;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if r.is_satisfied() {
        reason = TerminalReason::EncSatisfied;
    }
    Ok((r.edges.freeze(), RerTrace { operations, reason }))
}
