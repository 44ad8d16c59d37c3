//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line; run with `--nocapture` to see them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctrl_robust::attack::{exhaustive_rc, ExhaustiveMode};
use ctrl_robust::controllability::{exact_drivers, structural_drivers, Criterion};
use ctrl_robust::enc::RerBudget;
use ctrl_robust::enumeration::{enumerate_instances, evaluate_catalog, rational_to_decimal, CatalogEvaluation};
use ctrl_robust::experiment::{compute, ExperimentConfig, ExperimentResults};
use ctrl_robust::generators::Model;
use ctrl_robust::io::parse_edge_list;
use ctrl_robust::DirectedGraph;

/// (N, M, |Omega|, ENC, |I*|) as published.
const TABLE: [(usize, usize, usize, usize, usize); 30] = [
    (4, 4, 22, 1, 1),
    (4, 5, 37, 5, 1),
    (4, 6, 47, 11, 2),
    (4, 7, 38, 5, 1),
    (4, 8, 27, 2, 1),
    (4, 9, 13, 3, 2),
    (4, 10, 5, 3, 2),
    (4, 11, 1, 1, 1),
    (5, 5, 108, 1, 1),
    (5, 6, 326, 10, 1),
    (5, 7, 667, 47, 2),
    (5, 8, 1127, 69, 2),
    (5, 9, 1477, 26, 1),
    (5, 10, 1665, 5, 1),
    (5, 11, 1489, 26, 1),
    (5, 12, 1154, 70, 2),
    (5, 13, 707, 48, 2),
    (5, 14, 379, 12, 1),
    (5, 15, 154, 2, 1),
    (5, 16, 61, 5, 3),
    (5, 17, 16, 4, 3),
    (5, 18, 5, 3, 2),
    (5, 19, 1, 1, 1),
    (6, 6, 582, 1, 1),
    (6, 24, 1043, 4, 2),
    (6, 25, 288, 7, 4),
    (6, 26, 76, 8, 5),
    (6, 27, 17, 5, 4),
    (6, 28, 5, 3, 2),
    (6, 29, 1, 1, 1),
];

const SEED: u64 = 20_200_101;
const LARGE_N: usize = 200;
const LARGE_M: usize = 1000;
const INSTANCES: usize = 10;
const ATTACK_RUNS: usize = 20;
const MID_BUDGET: RerBudget = RerBudget::Limited(500);

fn report(id: u32, pass: bool, detail: &str) {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn table() -> &'static [CatalogEvaluation] {
    static CELL: OnceLock<Vec<CatalogEvaluation>> = OnceLock::new();
    CELL.get_or_init(|| {
        TABLE
            .iter()
            .map(|&(n, m, ..)| {
                let catalog = enumerate_instances(n, m).unwrap();
                evaluate_catalog(&catalog, Criterion::Structural).unwrap()
            })
            .collect()
    })
}

#[test]
fn criterion_01_omega_counts() {
    let mut mismatches = Vec::new();
    for (eval, &(n, m, omega, ..)) in table().iter().zip(&TABLE) {
        if eval.rows.len() != omega {
            mismatches.push(format!("({n},{m}): {} vs {omega}", eval.rows.len()));
        }
    }
    report(1, mismatches.is_empty(), &format!("|Omega| for 30 rows; mismatches {mismatches:?}"));
    assert!(mismatches.is_empty());
}

#[test]
fn criterion_02_enc_counts() {
    let mut mismatches = Vec::new();
    for (eval, &(n, m, _, enc, _)) in table().iter().zip(&TABLE) {
        if eval.enc_count() != enc {
            mismatches.push(format!("({n},{m}): {} vs {enc}", eval.enc_count()));
        }
    }
    report(2, mismatches.is_empty(), &format!("ENC counts for 30 rows; mismatches {mismatches:?}"));
    assert!(mismatches.is_empty());
}

/// Counts are compared and reported; only the subset relation is asserted.
#[test]
fn criterion_03_optimal_sets_within_enc() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut divergent = String::from("n,m,canonical,rc_num,rc_den,enc\n");
    let mut count_mismatches = 0;
    let mut violating_rows = Vec::new();
    for (eval, &(n, m, _, _, published_opt)) in table().iter().zip(&TABLE) {
        let opt = eval.optimal_count();
        let within = eval.rows.iter().filter(|r| r.optimal).all(|r| r.enc);
        let best = rational_to_decimal(eval.best_rc.as_ref().unwrap(), 4);
        println!(
            "  ({n},{m}) |I*| = {opt} (table {published_opt}), min <R_c> = {best}, I* within ENC: {within}"
        );
        if opt != published_opt {
            count_mismatches += 1;
        }
        if !within {
            violating_rows.push((n, m));
        }
        if opt != published_opt || !within {
            for r in eval.rows.iter().filter(|r| r.optimal) {
                let _ = writeln!(
                    divergent,
                    "{n},{m},{},{},{},{}",
                    r.canonical.to_hex(),
                    r.rc.numer(),
                    r.rc.denom(),
                    r.enc as u8
                );
            }
        }
    }
    let path = dir.join("criterion_03_optimal_instances.csv");
    std::fs::write(&path, divergent).unwrap();
    let pass = violating_rows.is_empty();
    report(
        3,
        pass,
        &format!(
            "I* within ENC fails on {} rows {violating_rows:?}; |I*| differs from the table on {count_mismatches} rows; optimal instances of divergent rows in {}",
            violating_rows.len(),
            path.display()
        ),
    );
    assert!(pass, "optimal instances outside the ENC set on rows {violating_rows:?}");
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DirectedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).unwrap()
}

#[test]
fn criterion_04_exhaustive_modes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut disagreements = 0;
    for _ in 0..50 {
        let p = rng.random_range(0.1..0.9);
        let g = random_graph(&mut rng, 5, p);
        let perm = exhaustive_rc(&g, ExhaustiveMode::Permutations, Criterion::Structural).unwrap();
        let sub = exhaustive_rc(&g, ExhaustiveMode::Subsets, Criterion::Structural).unwrap();
        if perm.exact != sub.exact {
            disagreements += 1;
        }
    }
    report(4, disagreements == 0, &format!("50 random N=5 graphs, {disagreements} exact disagreements"));
    assert_eq!(disagreements, 0);
}

#[test]
fn criterion_05_cycle_closed_form() {
    let mut failures = Vec::new();
    for n in 3..=7usize {
        let expect = BigRational::new(BigInt::from(n), BigInt::from(2 * (n - 1)));
        let g = DirectedGraph::cycle(n);
        for mode in [ExhaustiveMode::Permutations, ExhaustiveMode::Subsets] {
            let got = exhaustive_rc(&g, mode, Criterion::Structural).unwrap().exact.unwrap();
            if got != expect {
                failures.push(format!("N={n} {mode}: {got}"));
            }
        }
    }
    let six = exhaustive_rc(&DirectedGraph::cycle(6), ExhaustiveMode::Subsets, Criterion::Structural)
        .unwrap()
        .value;
    report(
        5,
        failures.is_empty(),
        &format!("N/(2(N-1)) for N=3..7 in both modes; N=6 gives {six} (table lists 0.6389); failures {failures:?}"),
    );
    assert!(failures.is_empty());
    assert_eq!(six, 0.6);
}

/// Largest matching by trying every choice of in-copy for each out-copy.
fn brute_force_matching(g: &DirectedGraph) -> usize {
    fn go(g: &DirectedGraph, u: usize, used: &mut Vec<bool>) -> usize {
        if u == g.node_count() {
            return 0;
        }
        let mut best = go(g, u + 1, used);
        for &v in g.out_neighbors(u) {
            if !used[v] {
                used[v] = true;
                best = best.max(1 + go(g, u + 1, used));
                used[v] = false;
            }
        }
        best
    }
    go(g, 0, &mut vec![false; g.node_count()])
}

/// Rank over the rationals by plain Gaussian elimination.
fn rational_rank(g: &DirectedGraph) -> usize {
    let n = g.node_count();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if g.has_edge(i, j) { BigRational::one() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..n {
            if r != rank && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[rank][col];
                for c in 0..n {
                    let d = &f * &a[rank][c];
                    a[r][c] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn criterion_06_driver_oracles() {
    let mut structural_checked = 0;
    let mut structural_bad = 0;
    for n in 2..=5usize {
        for m in n - 1..=n * (n - 1) {
            for inst in enumerate_instances(n, m).unwrap().instances {
                let expect = (n - brute_force_matching(&inst.graph)).max(1);
                if structural_drivers(&inst.graph).unwrap().count != expect {
                    structural_bad += 1;
                }
                structural_checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut exact_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let p = rng.random_range(0.05..0.7);
        let g = random_graph(&mut rng, n, p);
        let expect = (n - rational_rank(&g)).max(1);
        if exact_drivers(&g).unwrap().count != expect {
            exact_bad += 1;
        }
    }
    let pass = structural_bad == 0 && exact_bad == 0;
    report(
        6,
        pass,
        &format!(
            "structural vs brute-force matching on {structural_checked} classes ({structural_bad} bad); exact vs rational rank on 1000 graphs ({exact_bad} bad)"
        ),
    );
    assert!(pass);
}

fn large_grid(model: Model) -> &'static ExperimentResults {
    static ER: OnceLock<ExperimentResults> = OnceLock::new();
    static SF: OnceLock<ExperimentResults> = OnceLock::new();
    let cell = match model {
        Model::Er => &ER,
        Model::Sf => &SF,
        _ => unreachable!(),
    };
    cell.get_or_init(|| {
        compute(&ExperimentConfig {
            model: Some(model),
            input: None,
            nodes: Some(LARGE_N),
            edges: Some(LARGE_M),
            criterion: Criterion::Structural,
            runs: ATTACK_RUNS,
            budgets: vec![RerBudget::Limited(0), MID_BUDGET, RerBudget::Unlimited],
            seed: SEED,
            instances: INSTANCES,
            out_dir: PathBuf::new(),
        })
        .unwrap()
    })
}

#[test]
fn criterion_07_rer_improves_robustness() {
    let mut pass = true;
    let mut detail = String::new();
    for model in [Model::Er, Model::Sf] {
        let r = large_grid(model);
        let rc: Vec<f64> = [RerBudget::Limited(0), MID_BUDGET, RerBudget::Unlimited]
            .iter()
            .map(|&b| r.mean_rc(b))
            .collect();
        let decreasing = rc[0] > rc[1] && rc[1] > rc[2];
        let rectified: Vec<_> = r.cells_for(RerBudget::Unlimited).collect();
        let enc = rectified.iter().all(|c| c.enc_satisfied);
        let homogeneous = rectified.iter().all(|c| c.h_out == Some(1.0) && c.h_in == Some(1.0));
        let point_mass = rectified
            .iter()
            .all(|c| c.degrees_out == BTreeMap::from([(LARGE_M / LARGE_N, LARGE_N)]));
        pass &= decreasing && enc && homogeneous && point_mass;
        let _ = write!(
            detail,
            "{model}: R_c {:.4} > {:.4} > {:.4} {decreasing}, ENC {enc}, H=1 {homogeneous}, out-degree point mass {point_mass}; ",
            rc[0], rc[1], rc[2]
        );
    }
    report(7, pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_08_scale_free_worse_than_random() {
    let er: Vec<_> = large_grid(Model::Er).cells_for(RerBudget::Limited(0)).collect();
    let sf: Vec<_> = large_grid(Model::Sf).cells_for(RerBudget::Limited(0)).collect();
    let (mut h_wins, mut rc_wins) = (0, 0);
    for (e, s) in er.iter().zip(&sf) {
        h_wins += (s.h_out > e.h_out) as usize;
        rc_wins += (s.attack.mean_rc.value > e.attack.mean_rc.value) as usize;
    }
    let pass = h_wins >= 9 && rc_wins >= 9;
    report(
        8,
        pass,
        &format!("H_out(SF) > H_out(ER) in {h_wins}/10 pairs, R_c(SF) > R_c(ER) in {rc_wins}/10 pairs"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_disconnection_improves() {
    let mut pass = true;
    let mut detail = String::new();
    for model in [Model::Er, Model::Sf] {
        let r = large_grid(model);
        let before = r.disconnection_pooled(RerBudget::Limited(0)).unwrap().median;
        let after = r.disconnection_pooled(RerBudget::Unlimited).unwrap().median;
        pass &= after > before;
        let _ = write!(detail, "{model}: median P_N {before:.4} -> {after:.4}; ");
    }
    report(9, pass, &detail);
    assert!(pass);
}

fn ee_path() -> Option<PathBuf> {
    std::env::var_os("EE_EDGE_LIST")
        .map(PathBuf::from)
        .or_else(|| {
            let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/email-Eu-core.txt");
            p.exists().then_some(p)
        })
}

#[test]
#[ignore = "needs the email-Eu-core edge list: set EE_EDGE_LIST or place it at data/email-Eu-core.txt"]
fn criterion_10_real_data_ingestion() {
    let Some(path) = ee_path() else {
        report(10, false, "edge list not found");
        panic!("set EE_EDGE_LIST to the email-Eu-core edge list");
    };
    let doc = parse_edge_list(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let (n, m) = (doc.graph.node_count(), doc.graph.edge_count());
    let shape = n == 1005 && m == 24929;
    let r = compute(&ExperimentConfig {
        model: None,
        input: Some(path),
        nodes: None,
        edges: None,
        criterion: Criterion::Structural,
        runs: 10,
        budgets: vec![RerBudget::Limited(0), RerBudget::Limited(1000)],
        seed: SEED,
        instances: 1,
        out_dir: PathBuf::new(),
    })
    .unwrap();
    let (before, after) = (r.mean_rc(RerBudget::Limited(0)), r.mean_rc(RerBudget::Limited(1000)));
    let pass = shape && after < before;
    report(
        10,
        pass,
        &format!(
            "N = {n}, M = {m} ({} self-loops dropped); R_c {before:.4} -> {after:.4} after 1000 rectifications",
            doc.self_loops_dropped
        ),
    );
    assert!(pass);
}
