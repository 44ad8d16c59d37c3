//! Experiment grid: instances × RER budgets, each rectified, attacked and
//! summarized into CSV files plus a manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attack::{random_attack, RandomAttackSummary};
use crate::controllability::Criterion;
use crate::enc::{check_enc, rectify, RerBudget, TerminalReason};
use crate::error::{Error, Result};
use crate::generators::{generate, GeneratorParams, Model};
use crate::graph::{DirectedGraph, Side};
use crate::io::parse_edge_list;
use crate::metrics::{
    boxplot, degree_distribution, disconnection_threshold, heterogeneity_curve, heterogeneity_of,
    BoxplotStats, DisconnectionSummary, HeterogeneityPoint,
};
use crate::rng;

pub const SCHEMA_VERSION: u32 = 1;

fn one() -> usize {
    1
}

/// Either `model` with `nodes`/`edges`, or `input` pointing at an edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: Option<Model>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub edges: Option<usize>,
    #[serde(default)]
    pub criterion: Criterion,
    /// Random attacks per cell; also used for heterogeneity and disconnection.
    pub runs: usize,
    pub budgets: Vec<RerBudget>,
    pub seed: u64,
    #[serde(default = "one")]
    pub instances: usize,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match (&self.model, &self.input) {
            (Some(_), Some(_)) => return bad("give either a model or an input file, not both"),
            (None, None) => return bad("a model or an input file is required"),
            (Some(_), None) if self.nodes.is_none() || self.edges.is_none() => {
                return bad("generated instances need nodes and edges")
            }
            _ => {}
        }
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.instances == 0 {
            return bad("instances must be at least 1");
        }
        if self.budgets.is_empty() {
            return bad("at least one RER budget is required");
        }
        Ok(())
    }

    /// SHA-256 of the JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Seed of instance `j`, derived from the top-level seed.
pub fn instance_seed(seed: u64, j: usize) -> u64 {
    rng::stream(seed, rng::DOMAIN_EXPERIMENT, j as u64).next_u64()
}

/// Everything measured for one (instance, budget) pair.
#[derive(Debug, Clone)]
pub struct Cell {
    pub budget: RerBudget,
    pub instance: usize,
    pub seed: u64,
    pub operations: usize,
    pub reason: TerminalReason,
    pub enc_satisfied: bool,
    pub h_out: Option<f64>,
    pub h_in: Option<f64>,
    pub attack: RandomAttackSummary,
    pub heterogeneity_out: Vec<HeterogeneityPoint>,
    pub heterogeneity_in: Vec<HeterogeneityPoint>,
    pub disconnection: DisconnectionSummary,
    pub degrees_out: BTreeMap<usize, usize>,
    pub degrees_in: BTreeMap<usize, usize>,
    pub graph: DirectedGraph,
}

#[derive(Debug, Clone)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub node_count: usize,
    pub edge_count: usize,
    /// `M / (N (N - 1)) <= 0.05`, where the rank formula is stated to apply.
    pub sparse: bool,
    pub instance_seeds: Vec<u64>,
    /// Instance-major, budgets in config order.
    pub cells: Vec<Cell>,
    pub remap_csv: Option<String>,
}

impl ExperimentResults {
    pub fn cells_for(&self, budget: RerBudget) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.budget == budget)
    }

    /// Mean `R_c` over every instance of one budget.
    pub fn mean_rc(&self, budget: RerBudget) -> f64 {
        let rcs: Vec<f64> = self.cells_for(budget).map(|c| c.attack.mean_rc.value).collect();
        rcs.iter().sum::<f64>() / rcs.len() as f64
    }

    /// Disconnection proportions of every run of every instance, pooled.
    pub fn disconnection_pooled(&self, budget: RerBudget) -> Option<BoxplotStats> {
        let all: Vec<f64> = self
            .cells_for(budget)
            .flat_map(|c| c.disconnection.proportions.iter().copied())
            .collect();
        boxplot(&all)
    }

    /// Pooled per-step mean and population std of `n_D`.
    pub fn pooled_curve(&self, budget: RerBudget) -> Vec<(f64, f64)> {
        let cells: Vec<&Cell> = self.cells_for(budget).collect();
        let steps = self.node_count.saturating_sub(1);
        let k = cells.len() as f64;
        (0..steps)
            .map(|i| {
                let mean = cells.iter().map(|c| c.attack.mean[i]).sum::<f64>() / k;
                let second = cells
                    .iter()
                    .map(|c| c.attack.std[i].powi(2) + c.attack.mean[i].powi(2))
                    .sum::<f64>()
                    / k;
                (mean, (second - mean * mean).max(0.0).sqrt())
            })
            .collect()
    }
}

fn stage<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(stage))
}

fn load_input(path: &Path) -> Result<(DirectedGraph, String)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Stage {
        stage: "input",
        message: format!("{}: {e}", path.display()),
    })?;
    let doc = stage("input", parse_edge_list(&text))?;
    let remap = doc.remap_csv();
    Ok((doc.graph, remap))
}

fn measure(
    g: &DirectedGraph,
    budget: RerBudget,
    instance: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Cell> {
    let (graph, trace) = stage("rectify", rectify(g, budget, seed))?;
    let enc_satisfied = stage("rectify", check_enc(&graph))?.satisfied;
    let attack = stage("attack", random_attack(&graph, config.runs, seed, config.criterion))?;
    let het = |side| stage("heterogeneity", heterogeneity_curve(&graph, seed, config.runs, side));
    let heterogeneity_out = het(Side::Out)?;
    let heterogeneity_in = het(Side::In)?;
    let disconnection = stage("disconnection", disconnection_threshold(&graph, seed, config.runs))?;
    Ok(Cell {
        budget,
        instance,
        seed,
        operations: trace.operations_applied(),
        reason: trace.reason,
        enc_satisfied,
        h_out: heterogeneity_of(&graph.degree_sequence(Side::Out)),
        h_in: heterogeneity_of(&graph.degree_sequence(Side::In)),
        attack,
        heterogeneity_out,
        heterogeneity_in,
        disconnection,
        degrees_out: degree_distribution(&graph, Side::Out),
        degrees_in: degree_distribution(&graph, Side::In),
        graph,
    })
}

/// Runs the grid in memory.
pub fn compute(config: &ExperimentConfig) -> Result<ExperimentResults> {
    stage("config", config.validate())?;
    let input = config.input.as_deref().map(load_input).transpose()?;
    let instance_seeds: Vec<u64> = (0..config.instances).map(|j| instance_seed(config.seed, j)).collect();
    let mut cells = Vec::new();
    let (mut node_count, mut edge_count, mut sparse) = (0, 0, false);
    for (j, &seed) in instance_seeds.iter().enumerate() {
        let g = match (&input, config.model) {
            (Some((g, _)), _) => g.clone(),
            (None, Some(model)) => {
                let params = GeneratorParams::new(
                    model,
                    config.nodes.unwrap_or_default(),
                    config.edges.unwrap_or_default(),
                    seed,
                );
                stage("generate", generate(&params))?
            }
            (None, None) => unreachable!("validated"),
        };
        node_count = g.node_count();
        edge_count = g.edge_count();
        sparse = g.is_sparse();
        for &budget in &config.budgets {
            cells.push(measure(&g, budget, j, seed, config)?);
        }
    }
    Ok(ExperimentResults {
        config: config.clone(),
        node_count,
        edge_count,
        sparse,
        instance_seeds,
        cells,
        remap_csv: input.map(|(_, r)| r),
    })
}

fn schema_line(name: &str) -> String {
    format!("# ctrl-robust {name} schema v{SCHEMA_VERSION}\n")
}

pub fn curve_csv(results: &ExperimentResults, budget: RerBudget) -> String {
    let n = results.node_count as f64;
    let mut out = schema_line("curve") + "i,p_n,mean_nd,std_nd\n";
    for (i, (mean, std)) in results.pooled_curve(budget).into_iter().enumerate() {
        let step = i + 1;
        let _ = writeln!(out, "{step},{},{mean},{std}", step as f64 / n);
    }
    out
}

pub fn rc_summary_csv(results: &ExperimentResults) -> String {
    let mut out = schema_line("rc-summary")
        + "budget,instance,seed,operations,reason,enc,h_out,h_in,rc_mean,rc_std\n";
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for c in &results.cells {
        let std = match c.attack.mean_rc.provenance {
            crate::attack::Provenance::MonteCarlo { std, .. } => std,
            _ => 0.0,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.budget,
            c.instance,
            c.seed,
            c.operations,
            c.reason,
            c.enc_satisfied as u8,
            opt(c.h_out),
            opt(c.h_in),
            c.attack.mean_rc.value,
            std
        );
    }
    out
}

/// Per-step heterogeneity pooled over instances, weighted by defined runs.
pub fn heterogeneity_csv(results: &ExperimentResults, budget: RerBudget) -> String {
    let n = results.node_count;
    let mut out = schema_line("heterogeneity") + "removed,p_n,h_out,h_in,runs_out,runs_in\n";
    let pool = |pick: fn(&Cell) -> &Vec<HeterogeneityPoint>, i: usize| {
        let (mut sum, mut runs) = (0.0, 0);
        for c in results.cells_for(budget) {
            let p = &pick(c)[i];
            if let Some(m) = p.mean {
                sum += m * p.defined_runs as f64;
                runs += p.defined_runs;
            }
        }
        let mean = if runs > 0 { (sum / runs as f64).to_string() } else { String::new() };
        (mean, runs)
    };
    for i in 0..n {
        let (h_out, r_out) = pool(|c| &c.heterogeneity_out, i);
        let (h_in, r_in) = pool(|c| &c.heterogeneity_in, i);
        let _ = writeln!(out, "{i},{},{h_out},{h_in},{r_out},{r_in}", i as f64 / n as f64);
    }
    out
}

pub fn disconnection_csv(results: &ExperimentResults) -> String {
    let mut out = schema_line("disconnection") + "budget,runs,min,q1,median,q3,max,outliers\n";
    for &budget in &results.config.budgets {
        let runs: usize = results.cells_for(budget).map(|c| c.disconnection.proportions.len()).sum();
        if let Some(b) = results.disconnection_pooled(budget) {
            let outliers: Vec<String> = b.outliers.iter().map(f64::to_string).collect();
            let _ = writeln!(
                out,
                "{budget},{runs},{},{},{},{},{},{}",
                b.min,
                b.q1,
                b.median,
                b.q3,
                b.max,
                outliers.join(";")
            );
        }
    }
    out
}

pub fn degrees_csv(results: &ExperimentResults, budget: RerBudget) -> String {
    let mut out = schema_line("degrees") + "side,degree,count\n";
    for (side, pick) in [
        (Side::Out, (|c: &Cell| &c.degrees_out) as fn(&Cell) -> &BTreeMap<usize, usize>),
        (Side::In, |c: &Cell| &c.degrees_in),
    ] {
        let mut pooled = BTreeMap::new();
        for c in results.cells_for(budget) {
            for (&k, &count) in pick(c) {
                *pooled.entry(k).or_insert(0) += count;
            }
        }
        for (k, count) in pooled {
            let _ = writeln!(out, "{side},{k},{count}");
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool_version: &'static str,
    config: &'a ExperimentConfig,
    config_sha256: String,
    node_count: usize,
    edge_count: usize,
    sparse: bool,
    instance_seeds: &'a [u64],
    files: Vec<String>,
}

/// File name and contents of every artifact, in a fixed order.
pub fn render(results: &ExperimentResults) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for &b in &results.config.budgets {
        files.push((format!("curve_{b}.csv"), curve_csv(results, b)));
        files.push((format!("heterogeneity_{b}.csv"), heterogeneity_csv(results, b)));
        files.push((format!("degrees_{b}.csv"), degrees_csv(results, b)));
    }
    files.push(("rc_summary.csv".into(), rc_summary_csv(results)));
    files.push(("disconnection.csv".into(), disconnection_csv(results)));
    if let Some(remap) = &results.remap_csv {
        files.push(("remap.csv".into(), remap.clone()));
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        config: &results.config,
        config_sha256: results.config.hash(),
        node_count: results.node_count,
        edge_count: results.edge_count,
        sparse: results.sparse,
        instance_seeds: &results.instance_seeds,
        files: files.iter().map(|(name, _)| name.clone()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    files.push(("manifest.json".into(), json + "\n"));
    files
}

pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let io_err = |e: std::io::Error| Error::Stage {
        stage: "write",
        message: format!("{}: {e}", dir.display()),
    };
    fs::create_dir_all(dir).map_err(io_err)?;
    files
        .iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(io_err)?;
            Ok(path)
        })
        .collect()
}

/// Computes the grid and writes every artifact into `config.out_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let results = compute(config)?;
    write_files(&config.out_dir, &render(&results))
}
