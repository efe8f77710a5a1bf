use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hamwheel::beta::{self, BetaParams};
use hamwheel::bound::{self, BoundParams};
use hamwheel::crux;
use hamwheel::error::Error;
use hamwheel::expander::{self, CertLevel, ExpanderParams, ExtractBudget};
use hamwheel::gen::Family;
use hamwheel::graph::Graph;
use hamwheel::graph6;
use hamwheel::hamcount::{self, CountBudget};
use hamwheel::report::{self, Format};
use hamwheel::seed;
use hamwheel::wheel::{self, PipelineParams};
use hamwheel::Rational;

#[derive(Parser)]
#[command(name = "hamwheel", version, about = "Hamiltonian subsets, crux, expanders and wheels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct GraphInput {
    /// graph6 file (optionally with the >>graph6<< header)
    #[arg(long, value_name = "FILE")]
    graph6: Option<PathBuf>,
    /// edge list file: "n m" header then "u v" lines
    #[arg(long, value_name = "FILE")]
    edgelist: Option<PathBuf>,
    /// generator spec, e.g. complete:8, gnp:30:0.4, random_regular:2000:3
    #[arg(long, value_name = "SPEC")]
    family: Option<String>,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// worker threads; falls back to HAMWHEEL_THREADS, then 1
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_name = "MS")]
    budget_ms: Option<u64>,
    /// write the report here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count Hamiltonian subsets exactly
    Count {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        common: Common,
        /// raise the feasibility cap on the order
        #[arg(long)]
        cap_n: Option<usize>,
    },
    /// Compute the crux c_alpha exactly
    Crux {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        common: Common,
        /// alpha as P/Q
        #[arg(long, default_value = "1/5")]
        alpha: String,
        /// refute sizes only up to this cap
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Extract a sublinear-expander subgraph
    Extract {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        common: Common,
        /// eps1 as P/Q; defaults to the 1/(10C) preset
        #[arg(long)]
        eps1: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        /// the C of delta = C*eps1/ln3
        #[arg(long)]
        big_c: Option<f64>,
    },
    /// Run the full cycle-chain-wheel pipeline to a heavy vertex
    Wheel {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lmin: Option<usize>,
        #[arg(long)]
        lmax: Option<usize>,
        #[arg(long)]
        conn_cap: Option<usize>,
        #[arg(long)]
        target_cycles: Option<usize>,
    },
    /// Check the beta-graph property and evaluate the counting bounds
    Beta {
        #[command(flatten)]
        input: GraphInput,
        #[command(flatten)]
        common: Common,
        /// beta as P/Q
        #[arg(long, default_value = "1/4")]
        beta: String,
        /// half-size subsets to sample for long cycles
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Exhaustive minimizer census over small graphs
    Census {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        mindeg: usize,
    },
    /// Evaluate the main counting bound numerically
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 1.0)]
        big_b: f64,
    },
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, Error> {
    let bad = || Error::Invariant(format!("{what} must be P/Q, got `{s}`"));
    let (p, q) = s.split_once('/').ok_or_else(bad)?;
    let p: u64 = p.trim().parse().map_err(|_| bad())?;
    let q: u64 = q.trim().parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// Load the graph and round-trip it through graph6 (every run
/// exercises the codec).
fn load_graph(input: &GraphInput, seed: u64) -> Result<Graph, Error> {
    let sources = [input.graph6.is_some(), input.edgelist.is_some(), input.family.is_some()];
    if sources.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::Invariant(
            "supply exactly one of --graph6, --edgelist, --family".into(),
        ));
    }
    let read = |p: &PathBuf| {
        std::fs::read_to_string(p).map_err(|e| Error::Invariant(format!("{}: {e}", p.display())))
    };
    let g = if let Some(p) = &input.graph6 {
        graph6::decode(read(p)?.trim())?
    } else if let Some(p) = &input.edgelist {
        graph6::decode_edge_list(&read(p)?)?
    } else {
        let fam = Family::parse(input.family.as_ref().unwrap())?;
        hamwheel::gen::generate(&fam, seed)?
    };
    g.check_invariants()?;
    let round = graph6::decode(&graph6::encode(&g))?;
    if round != g {
        return Err(Error::Invariant("graph6 round trip altered the graph".into()));
    }
    Ok(round)
}

fn threads(common: &Common) -> usize {
    common
        .threads
        .or_else(|| std::env::var("HAMWHEEL_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

/// Exit 2 marks a verified negative finding rather than a usage error.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NotBetaGraph { .. }
        | Error::ExtractionFailed { .. }
        | Error::PipelineStage { .. }
        | Error::CruxCapExceeded { .. }
        | Error::NoBall { .. }
        | Error::NoShortPath { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(String, Common, u8), (Error, Common)> {
    let start = Instant::now();
    let (name, common, value, code): (&str, Common, serde_json::Value, u8) = match cli.cmd {
        Cmd::Count { input, common, cap_n } => {
            let g = load_graph(&input, common.seed).map_err(|e| (e, common.clone()))?;
            let mut budget = CountBudget::default();
            if let Some(c) = cap_n {
                budget.cap_n = c;
            }
            budget.threads = threads(&common);
            budget.time_limit = common.budget_ms.map(Duration::from_millis);
            let r = hamcount::count_hamiltonian_subsets(&g, &budget)
                .map_err(|e| (e, common.clone()))?;
            ("count", common, serde_json::to_value(&r).unwrap(), 0)
        }
        Cmd::Crux { input, common, alpha, cap } => {
            let g = load_graph(&input, common.seed).map_err(|e| (e, common.clone()))?;
            let alpha = parse_rational(&alpha, "--alpha").map_err(|e| (e, common.clone()))?;
            let cap = cap.unwrap_or(g.n());
            let r = crux::crux_exact(&g, alpha, cap).map_err(|e| (e, common.clone()))?;
            ("crux", common, serde_json::to_value(&r).unwrap(), 0)
        }
        Cmd::Extract { input, common, eps1, k, big_c } => {
            let g = load_graph(&input, common.seed).map_err(|e| (e, common.clone()))?;
            let preset = ExpanderParams::strict();
            let eps1 = match eps1 {
                Some(s) => {
                    let r = parse_rational(&s, "--eps1").map_err(|e| (e, common.clone()))?;
                    *r.numer() as f64 / *r.denom() as f64
                }
                None => preset.eps1,
            };
            let params = ExpanderParams::new(eps1, k.unwrap_or(preset.k), big_c.unwrap_or(preset.c))
                .map_err(|e| (e, common.clone()))?;
            let budget = ExtractBudget {
                seed: seed::derive(common.seed, "extract"),
                ..ExtractBudget::default()
            };
            let ex = expander::extract_expander(&g, &params, &budget)
                .map_err(|e| (e, common.clone()))?;
            let value = json!({
                "order": ex.graph.n(),
                "edges": ex.graph.m(),
                "vertices": ex.vertices.to_sorted_vec(),
                "certificate": serde_json::to_value(&ex.cert).unwrap(),
                "graph6": graph6::encode(&ex.graph),
            });
            ("extract", common, value, 0)
        }
        Cmd::Wheel { input, common, lmin, lmax, conn_cap, target_cycles } => {
            let g = load_graph(&input, common.seed).map_err(|e| (e, common.clone()))?;
            let mut p = PipelineParams::for_order(g.n());
            if let Some(v) = lmin {
                p.lmin = v;
            }
            if let Some(v) = lmax {
                p.lmax = v;
            }
            if let Some(v) = conn_cap {
                p.conn_cap = v;
            }
            if let Some(v) = target_cycles {
                p.target_cycles = v;
            }
            let budget = ExtractBudget {
                seed: seed::derive(common.seed, "extract"),
                ..ExtractBudget::default()
            };
            let hv = wheel::heavy_vertex(&g, &p, &budget, seed::derive(common.seed, "harvest"))
                .map_err(|e| (e, common.clone()))?;
            let mut value = serde_json::to_value(&hv).unwrap();
            value["params"] = serde_json::to_value(&p).unwrap();
            ("wheel", common, value, 0)
        }
        Cmd::Beta { input, common, beta: beta_s, samples } => {
            let g = load_graph(&input, common.seed).map_err(|e| (e, common.clone()))?;
            let b = parse_rational(&beta_s, "--beta").map_err(|e| (e, common.clone()))?;
            let p = BetaParams::new(b, g.n()).map_err(|e| (e, common.clone()))?;
            let level = if g.n() <= beta::BETA_EXHAUSTIVE_MAX_N {
                CertLevel::Exhaustive
            } else {
                CertLevel::Probed {
                    probes: 200,
                    seed: seed::derive(common.seed, "beta"),
                }
            };
            let check = beta::check_beta_graph(&g, &p, level).map_err(|e| (e, common.clone()))?;
            if !check.holds {
                let value = json!({ "check": serde_json::to_value(&check).unwrap(), "bounds": null });
                ("beta", common, value, 2)
            } else {
                let bounds =
                    beta::count_lower_bound_beta(&g, &p, samples, seed::derive(common.seed, "beta-samples"))
                        .map_err(|e| (e, common.clone()))?;
                let value = json!({
                    "check": serde_json::to_value(&check).unwrap(),
                    "bounds": serde_json::to_value(&bounds).unwrap(),
                });
                ("beta", common, value, 0)
            }
        }
        Cmd::Census { common, nmax, mindeg } => {
            let r = hamcount::exhaustive_min_search(nmax, mindeg).map_err(|e| (e, common.clone()))?;
            ("census", common, serde_json::to_value(&r).unwrap(), 0)
        }
        Cmd::Bound { common, n, t, big_b } => {
            let p = BoundParams {
                b: big_b,
                ..BoundParams::default()
            };
            let r = bound::evaluate_main_bound(n, t, &p).map_err(|e| (e, common.clone()))?;
            ("bound", common, serde_json::to_value(&r).unwrap(), 0)
        }
    };
    let rendered = report::render(name, common.seed, &value, start.elapsed(), common.format);
    Ok((rendered, common, code))
}

fn emit(common: &Common, text: &str) -> std::io::Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap reserves 2 for its own errors; usage problems are 1 here
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok((text, common, code)) => {
            if emit(&common, &text).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err((err, common)) => {
            let value = json!({ "error": err.to_string() });
            let rendered = report::render("error", common.seed, &value, Duration::ZERO, common.format);
            if emit(&common, &rendered).is_err() {
                return ExitCode::from(1);
            }
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
