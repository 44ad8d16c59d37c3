use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ctrl_robust::attack::{exhaustive_mean_curve, exhaustive_rc, random_attack, ExhaustiveMode};
use ctrl_robust::controllability::Criterion;
use ctrl_robust::enc::{check_enc, rectify, RerBudget};
use ctrl_robust::enumeration::{enumerate_instances, evaluate_catalog};
use ctrl_robust::experiment::{run_experiment, ExperimentConfig};
use ctrl_robust::generators::{generate, GeneratorParams, Model};
use ctrl_robust::io::{emit_edge_list, parse_edge_list};
use ctrl_robust::metrics::basic_features;
use ctrl_robust::{DirectedGraph, Error, Result};

#[derive(Parser)]
#[command(name = "ctrl-robust", version, about = "Robustness of network controllability under random node removal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic network as an edge list.
    Generate {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random (or exhaustive) node-removal attack; prints the curve as CSV.
    Attack {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = Criterion::Structural)]
        criterion: Criterion,
        #[arg(long, default_value_t = 50)]
        runs: usize,
        #[arg(long, required_unless_present = "exhaustive")]
        seed: Option<u64>,
        /// Average over every removal order instead of sampling.
        #[arg(long, value_parser = parse_mode)]
        exhaustive: Option<ExhaustiveMode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply random edge rectification and emit the result.
    Rectify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "unlimited")]
        rer_budget: RerBudget,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate all weakly connected (N, M) digraphs and score them exactly.
    Enumerate {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long, default_value_t = Criterion::Structural)]
        criterion: Criterion,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report violations of the degree condition.
    EncCheck {
        #[arg(long)]
        input: PathBuf,
    },
    /// Basic topology features as JSON.
    Features {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run a full instance × budget grid and write CSV artifacts.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; other flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    model: Option<Model>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = Criterion::Structural)]
    criterion: Criterion,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,unlimited")]
    rer_budget: Vec<RerBudget>,
    #[arg(long, required_unless_present = "config")]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    instances: usize,
    #[arg(long, required_unless_present = "config")]
    out_dir: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<ExhaustiveMode, String> {
    match s {
        "permutations" => Ok(ExhaustiveMode::Permutations),
        "subsets" => Ok(ExhaustiveMode::Subsets),
        other => Err(format!("expected permutations or subsets, got {other:?}")),
    }
}

fn read_graph(path: &Path) -> Result<DirectedGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::Stage {
        stage: "input",
        message: format!("{}: {e}", path.display()),
    })?;
    let doc = parse_edge_list(&text)?;
    if doc.self_loops_dropped + doc.duplicates_dropped > 0 {
        eprintln!(
            "dropped {} self-loops and {} duplicate edges",
            doc.self_loops_dropped, doc.duplicates_dropped
        );
    }
    Ok(doc.graph)
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Error::Stage {
            stage: "write",
            message: format!("{}: {e}", path.display()),
        }),
        None => match std::io::stdout().write_all(body.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Stage {
                stage: "write",
                message: e.to_string(),
            }),
            _ => Ok(()),
        },
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { model, nodes, edges, seed, out } => {
            let g = generate(&GeneratorParams::new(model, nodes, edges, seed))?;
            emit(out.as_deref(), &emit_edge_list(&g))
        }
        Command::Attack { input, criterion, runs, seed, exhaustive, out } => {
            let g = read_graph(&input)?;
            let n = g.node_count();
            let mut csv = String::from("i,p_n,mean_nd,std_nd\n");
            let rc = match exhaustive {
                Some(mode) => {
                    let curve = exhaustive_mean_curve(&g, criterion)?;
                    for (i, v) in curve.iter().enumerate() {
                        let v: f64 = num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::NAN);
                        let _ = writeln!(csv, "{},{},{v},", i + 1, (i + 1) as f64 / n as f64);
                    }
                    let score = exhaustive_rc(&g, mode, criterion)?;
                    match score.exact {
                        Some(x) => format!("{} ({x})", score.value),
                        None => score.value.to_string(),
                    }
                }
                None => {
                    let s = random_attack(&g, runs, seed.expect("required by clap"), criterion)?;
                    for (i, (m, sd)) in s.mean.iter().zip(&s.std).enumerate() {
                        let _ = writeln!(csv, "{},{},{m},{sd}", i + 1, (i + 1) as f64 / n as f64);
                    }
                    s.mean_rc.value.to_string()
                }
            };
            eprintln!("R_c = {rc}");
            if criterion == Criterion::Exact && !g.is_sparse() {
                eprintln!("note: graph is not sparse (M/M_max > 0.05)");
            }
            emit(out.as_deref(), &csv)
        }
        Command::Rectify { input, rer_budget, seed, out } => {
            let g = read_graph(&input)?;
            let (h, trace) = rectify(&g, rer_budget, seed)?;
            eprintln!("{} operations, {}", trace.operations_applied(), trace.reason);
            emit(out.as_deref(), &emit_edge_list(&h))
        }
        Command::Enumerate { nodes, edges, criterion, out } => {
            let catalog = enumerate_instances(nodes, edges)?;
            let eval = evaluate_catalog(&catalog, criterion)?;
            let s = eval.summary();
            eprintln!(
                "{} instances, {} satisfy ENC, {} optimal, optimal within ENC: {}",
                s.instances, s.enc, s.optimal, s.optimal_within_enc
            );
            emit(out.as_deref(), &eval.to_csv())
        }
        Command::EncCheck { input } => {
            let g = read_graph(&input)?;
            let report = check_enc(&g)?;
            let mut text = format!(
                "bounds [{}, {}]: {}\n",
                report.bounds.lower,
                report.bounds.upper,
                if report.satisfied { "satisfied" } else { "violated" }
            );
            for v in &report.violations {
                let _ = writeln!(text, "node {} {}-degree {} outside bounds", v.node, v.side, v.degree);
            }
            emit(None, &text)
        }
        Command::Features { input } => {
            let g = read_graph(&input)?;
            let f = basic_features(&g)?;
            emit(None, &(serde_json::to_string_pretty(&f).expect("features serialize") + "\n"))
        }
        Command::Experiment(args) => {
            let config = match &args.config {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::Stage {
                        stage: "config",
                        message: format!("{}: {e}", path.display()),
                    })?;
                    serde_json::from_str(&text).map_err(|e| Error::Stage {
                        stage: "config",
                        message: e.to_string(),
                    })?
                }
                None => ExperimentConfig {
                    model: args.model,
                    input: args.input,
                    nodes: args.nodes,
                    edges: args.edges,
                    criterion: args.criterion,
                    runs: args.runs,
                    budgets: args.rer_budget,
                    seed: args.seed.expect("required by clap"),
                    instances: args.instances,
                    out_dir: args.out_dir.expect("required by clap"),
                },
            };
            let mut listing = String::new();
            for path in run_experiment(&config)? {
                let _ = writeln!(listing, "{}", path.display());
            }
            emit(None, &listing)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
