//! `popolo` — solve, verify, reduce, and brute-force popular-arborescence
//! style instances from the command line.
//!
//! All results are JSON on stdout (pretty-printed behind `--pretty`);
//! diagnostics go to stderr. Exit codes: 0 success, 1 parse/validation
//! error (with a structured error document), 2 no popular solution,
//! 3 structurally infeasible, 4 certificate rejected by `verify`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use popolo_core::instance::{
    cost_to_value, parse_solution, serialize_instance, solution_to_value, CostMap,
};
use popolo_core::oracle::{self, GeneratorSpec};
use popolo_core::reductions::{self, ColorfulOutcome, MinCostOutcome, ReductionMap};
use popolo_core::solver::{
    classify_edges, extract_dual, solve_forced_forbidden, verify_certificate, DualCertificate,
    SolveOutcome, SolveTrace,
};
use popolo_core::{parse_instance, ElemSet, Error, Instance, InstanceKind, Solution};

#[derive(Parser)]
#[command(
    name = "popolo",
    version,
    about = "popular arborescences, common bases, and colorful forests"
)]
struct Cli {
    /// Pretty-print the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a popular solution with its dual certificate.
    Solve(SolveArgs),
    /// Check a solution + certificate document against an instance.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Unpopularity margin of a solution (0 means popular).
    Margin { instance: PathBuf, solution: PathBuf },
    /// Classify every element across all popular solutions.
    Classify { instance: PathBuf },
    /// Transform an instance (branching, to-base, size-window, categories).
    Reduce(ReduceArgs),
    /// Min-cost popular colorful forest (weak rankings only).
    MincostForest { instance: PathBuf, costs: PathBuf },
    /// Brute-force ground truth at desk scale.
    Brute(BruteArgs),
    /// Generate instances (random, hardness gadgets, worked examples).
    Gen {
        spec: PathBuf,
        /// Print only the instance document, byte-identical to fixtures.
        #[arg(long)]
        instance_only: bool,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Attach the iteration trace to the output.
    #[arg(long)]
    trace: bool,
    /// Comma-separated element ids that must be in the solution.
    #[arg(long, value_delimiter = ',')]
    forced: Vec<usize>,
    /// Comma-separated element ids that must be avoided.
    #[arg(long, value_delimiter = ',')]
    forbidden: Vec<usize>,
}

#[derive(Args)]
struct ReduceArgs {
    instance: PathBuf,
    #[arg(value_enum)]
    mode: ReduceMode,
    /// Lower size bound (size-window).
    #[arg(long)]
    lo: Option<usize>,
    /// Upper size bound (size-window).
    #[arg(long)]
    hi: Option<usize>,
    /// Category description file (categories).
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceMode {
    /// Add a root with worst-choice edges to every vertex.
    Branching,
    /// Common independent sets -> common bases via per-agent dummies.
    ToBase,
    /// Popularity within a size window [lo, hi].
    SizeWindow,
    /// Per-category assignment bounds.
    Categories,
}

#[derive(Args)]
struct BruteArgs {
    instance: PathBuf,
    #[arg(value_enum)]
    what: BruteWhat,
    /// Cost document (required for min-cost).
    #[arg(long)]
    costs: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BruteWhat {
    /// All popular solutions.
    Popular,
    /// All feasible solutions (bases, or independent sets for forests).
    Bases,
    /// A minimum-unpopularity-margin solution.
    MinMargin,
    /// A minimum-cost popular solution.
    MinCost,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let pretty = cli.pretty;
    match run(cli.command) {
        Ok((Value::Null, code)) => code,
        Ok((value, code)) => {
            emit(&value, pretty);
            code
        }
        Err(err) => {
            let doc = json!({"error": {"kind": error_kind(&err), "message": err.to_string()}});
            emit(&doc, pretty);
            ExitCode::from(1)
        }
    }
}

fn emit(value: &Value, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(value).expect("serializable output")
    } else {
        serde_json::to_string(value).expect("serializable output")
    };
    println!("{text}");
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Schema(_) | Error::Json(_) => "schema",
        Error::ElementOutOfRange(..) => "element_out_of_range",
        Error::BadPreferenceOrder { .. } => "bad_preference_order",
        Error::OverlappingDirectSum => "overlapping_direct_sum",
        Error::GroundMismatch(..) => "ground_mismatch",
        Error::NoCommonBase => "no_common_base",
        Error::UnassignedAgent(..) => "unassigned_agent",
        Error::DeskScaleExceeded { .. } => "desk_scale_exceeded",
        Error::PartialOrderUnsupported(_) => "partial_order_unsupported",
        Error::Infeasible(_) => "infeasible",
        Error::Generator(_) => "generator",
    }
}

fn run(command: Command) -> Result<(Value, ExitCode), Error> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify { instance, solution } => cmd_verify(&instance, &solution),
        Command::Margin { instance, solution } => cmd_margin(&instance, &solution),
        Command::Classify { instance } => cmd_classify(&instance),
        Command::Reduce(args) => cmd_reduce(args),
        Command::MincostForest { instance, costs } => cmd_mincost(&instance, &costs),
        Command::Brute(args) => cmd_brute(args),
        Command::Gen {
            spec,
            instance_only,
        } => cmd_gen(&spec, instance_only),
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, Error> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    parse_instance(&bytes)
}

fn read_json(path: &PathBuf) -> Result<Value, Error> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn id_set(inst: &Instance, ids: &[usize]) -> Result<ElemSet, Error> {
    for &e in ids {
        if e >= inst.ground_size() {
            return Err(Error::ElementOutOfRange(e, inst.ground_size()));
        }
    }
    Ok(ElemSet::from_iter(inst.ground_size(), ids.iter().copied()))
}

fn certificate_value(cert: &DualCertificate) -> Value {
    json!({"chain": cert.chain.iter().map(|s| s.to_vec()).collect::<Vec<_>>()})
}

fn trace_value(trace: &SolveTrace) -> Value {
    serde_json::to_value(trace).expect("trace serialization")
}

fn reduction_value(inst: &Instance, map: &ReductionMap) -> Value {
    let dummies: BTreeMap<String, usize> = map
        .dummies
        .iter()
        .enumerate()
        .map(|(a, &d)| (inst.agents[a].clone(), d))
        .collect();
    let forward: BTreeMap<String, usize> = map
        .forward
        .iter()
        .enumerate()
        .map(|(o, &x)| (o.to_string(), x))
        .collect();
    json!({"dummies": dummies, "map": forward})
}

fn cmd_solve(args: SolveArgs) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(&args.instance)?;
    if inst.kind == InstanceKind::ColorfulForest {
        if !args.forced.is_empty() || !args.forbidden.is_empty() {
            return Err(Error::Schema(
                "forced/forbidden elements are only supported for base problems".into(),
            ));
        }
        return match reductions::solve_colorful(&inst)? {
            ColorfulOutcome::Popular {
                solution,
                certificate,
                trace,
                map,
                ..
            } => {
                let mut doc = json!({
                    "status": "popular",
                    "solution": solution_to_value(&inst, &solution),
                    "certificate": certificate_value(&certificate),
                    "reduction": reduction_value(&inst, &map),
                });
                if args.trace {
                    doc["trace"] = trace_value(&trace);
                }
                Ok((doc, ExitCode::from(0)))
            }
            ColorfulOutcome::NoPopular { trace, .. } => {
                let mut doc = json!({"status": "no_popular"});
                if args.trace {
                    doc["trace"] = trace_value(&trace);
                }
                Ok((doc, ExitCode::from(2)))
            }
        };
    }

    let forced = id_set(&inst, &args.forced)?;
    let forbidden = id_set(&inst, &args.forbidden)?;
    match solve_forced_forbidden(&inst, &forced, &forbidden) {
        SolveOutcome::Popular {
            solution,
            certificate,
            trace,
        } => {
            let mut doc = json!({
                "status": "popular",
                "solution": solution_to_value(&inst, &solution),
                "certificate": certificate_value(&certificate),
            });
            if args.trace {
                doc["trace"] = trace_value(&trace);
            }
            Ok((doc, ExitCode::from(0)))
        }
        SolveOutcome::NoPopular { trace } => {
            let mut doc = json!({"status": "no_popular"});
            if args.trace {
                doc["trace"] = trace_value(&trace);
            }
            Ok((doc, ExitCode::from(2)))
        }
        SolveOutcome::StructurallyInfeasible => Ok((
            json!({"status": "structurally_infeasible"}),
            ExitCode::from(3),
        )),
    }
}

/// Pull solution and certificate out of a `solve` output document.
fn parse_solution_document(
    inst: &Instance,
    doc: &Value,
) -> Result<(Solution, Option<DualCertificate>), Error> {
    let solution_value = doc.get("solution").unwrap_or(doc);
    let solution = parse_solution(inst, solution_value.to_string().as_bytes())?;
    let certificate = match doc.get("certificate").and_then(|c| c.get("chain")) {
        None => None,
        Some(chain) => {
            let lists: Vec<Vec<usize>> = serde_json::from_value(chain.clone())?;
            let ground = certificate_ground(inst);
            let mut sets = Vec::new();
            for list in lists {
                if let Some(&bad) = list.iter().find(|&&e| e >= ground) {
                    return Err(Error::ElementOutOfRange(bad, ground));
                }
                sets.push(ElemSet::from_iter(ground, list));
            }
            Some(DualCertificate { chain: sets })
        }
    };
    Ok((solution, certificate))
}

/// Certificates for colorful instances live on the auxiliary ground set.
fn certificate_ground(inst: &Instance) -> usize {
    match inst.kind {
        InstanceKind::ColorfulForest => inst.ground_size() + inst.n_agents(),
        _ => inst.ground_size(),
    }
}

fn cmd_verify(instance: &PathBuf, solution: &PathBuf) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(instance)?;
    let doc = read_json(solution)?;
    let (sol, certificate) = parse_solution_document(&inst, &doc)?;
    let Some(certificate) = certificate else {
        return Err(Error::Schema("document carries no certificate".into()));
    };
    let (target, lifted);
    match inst.kind {
        InstanceKind::ColorfulForest => {
            let (aux, map) = reductions::independent_to_base(&inst)?;
            lifted = map.lift(&aux, &sol);
            target = aux;
        }
        _ => {
            target = inst;
            lifted = sol;
        }
    }
    match verify_certificate(&target, &lifted, &certificate) {
        Ok(()) => {
            let dual = extract_dual(&target, &lifted, &certificate)
                .expect("verified certificates yield dual values");
            let doc = json!({
                "valid": true,
                "objective": dual.objective,
                "alpha": target
                    .agents
                    .iter()
                    .zip(dual.alpha.iter())
                    .map(|(a, v)| (a.clone(), *v))
                    .collect::<BTreeMap<String, i64>>(),
            });
            Ok((doc, ExitCode::from(0)))
        }
        Err(violation) => Ok((
            json!({"valid": false, "reason": violation}),
            ExitCode::from(4),
        )),
    }
}

fn cmd_margin(instance: &PathBuf, solution: &PathBuf) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(instance)?;
    let doc = read_json(solution)?;
    let (sol, _) = parse_solution_document(&inst, &doc)?;
    let margin = oracle::margin(&inst, &sol)?;
    Ok((json!({"margin": margin}), ExitCode::from(0)))
}

fn cmd_classify(instance: &PathBuf) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(instance)?;
    match classify_edges(&inst) {
        Ok(statuses) => {
            let map: BTreeMap<String, Value> = statuses
                .iter()
                .enumerate()
                .map(|(e, s)| (e.to_string(), serde_json::to_value(s).unwrap()))
                .collect();
            Ok((json!({"elements": map}), ExitCode::from(0)))
        }
        Err(Error::Infeasible(msg)) => Ok((
            json!({"error": {"kind": "no_popular", "message": msg}}),
            ExitCode::from(2),
        )),
        Err(other) => Err(other),
    }
}

fn cmd_reduce(args: ReduceArgs) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(&args.instance)?;
    let (aux, map) = match args.mode {
        ReduceMode::Branching => {
            let aux = reductions::branching_to_arborescence(&inst)?;
            let doc = json!({
                "instance": instance_value(&aux),
                "reduction": {"dummies": {}, "map": identity_map(inst.ground_size())},
            });
            return Ok((doc, ExitCode::from(0)));
        }
        ReduceMode::ToBase => {
            if inst.kind == InstanceKind::ColorfulForest {
                reductions::independent_to_base(&inst)?
            } else {
                reductions::common_independent_to_base(&inst)?
            }
        }
        ReduceMode::SizeWindow => {
            let (lo, hi) = match (args.lo, args.hi) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(Error::Schema("size-window needs --lo and --hi".into())),
            };
            reductions::with_size_window(&inst, lo, hi)?
        }
        ReduceMode::Categories => {
            let Some(path) = &args.spec else {
                return Err(Error::Schema("categories needs --spec".into()));
            };
            let doc = read_json(path)?;
            let list = doc
                .get("categories")
                .and_then(|c| c.as_array())
                .ok_or_else(|| Error::Schema("category file needs a categories array".into()))?;
            let mut categories = Vec::new();
            let mut bounds = Vec::new();
            for entry in list {
                let agents = entry
                    .get("agents")
                    .and_then(|a| a.as_array())
                    .ok_or_else(|| Error::Schema("category needs an agents array".into()))?;
                let mut ids = Vec::new();
                for a in agents {
                    let name = a
                        .as_str()
                        .ok_or_else(|| Error::Schema("agent names are strings".into()))?;
                    let id = inst
                        .agent_index(name)
                        .ok_or_else(|| Error::Schema(format!("unknown agent {name:?}")))?;
                    ids.push(id);
                }
                let lo = entry.get("lo").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
                let hi = entry
                    .get("hi")
                    .and_then(|v| v.as_u64())
                    .map(|v| v as usize)
                    .unwrap_or(ids.len());
                categories.push(ids);
                bounds.push((lo, hi));
            }
            reductions::with_categories(&inst, &categories, &bounds)?
        }
    };
    let doc = json!({
        "instance": instance_value(&aux),
        "reduction": reduction_value(&inst, &map),
    });
    Ok((doc, ExitCode::from(0)))
}

fn identity_map(n: usize) -> Value {
    let map: BTreeMap<String, usize> = (0..n).map(|e| (e.to_string(), e)).collect();
    serde_json::to_value(map).unwrap()
}

fn instance_value(inst: &Instance) -> Value {
    serde_json::from_slice(&serialize_instance(inst)).expect("canonical instance document")
}

fn cmd_mincost(instance: &PathBuf, costs: &PathBuf) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(instance)?;
    let bytes =
        std::fs::read(costs).map_err(|e| Error::Schema(format!("{}: {e}", costs.display())))?;
    let costs = CostMap::parse(&inst, &bytes)?;
    match reductions::min_cost_popular_colorful_forest(&inst, &costs)? {
        MinCostOutcome::Forest { solution, total } => {
            let doc = json!({
                "status": "forest",
                "solution": solution_to_value(&inst, &solution),
                "cost": cost_to_value(&total),
            });
            Ok((doc, ExitCode::from(0)))
        }
        MinCostOutcome::NoPopular => Ok((json!({"status": "no_popular"}), ExitCode::from(2))),
    }
}

fn cmd_brute(args: BruteArgs) -> Result<(Value, ExitCode), Error> {
    let inst = load_instance(&args.instance)?;
    let doc = match args.what {
        BruteWhat::Popular => {
            let solutions = oracle::brute_popular(&inst)?;
            json!({"solutions": solutions
                .iter()
                .map(|s| solution_to_value(&inst, s))
                .collect::<Vec<_>>()})
        }
        BruteWhat::Bases => {
            let solutions = oracle::enumerate_rivals(&inst)?;
            json!({"solutions": solutions
                .iter()
                .map(|s| solution_to_value(&inst, s))
                .collect::<Vec<_>>()})
        }
        BruteWhat::MinMargin => {
            let (solution, margin) = oracle::brute_min_margin(&inst)?;
            json!({"solution": solution_to_value(&inst, &solution), "margin": margin})
        }
        BruteWhat::MinCost => {
            let Some(path) = &args.costs else {
                return Err(Error::Schema("min-cost needs --costs".into()));
            };
            let bytes = std::fs::read(path)
                .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
            let costs = CostMap::parse(&inst, &bytes)?;
            let (solution, total) = oracle::brute_min_cost_popular(&inst, &costs)?;
            json!({"solution": solution_to_value(&inst, &solution), "cost": cost_to_value(&total)})
        }
    };
    Ok((doc, ExitCode::from(0)))
}

fn cmd_gen(spec: &PathBuf, instance_only: bool) -> Result<(Value, ExitCode), Error> {
    let bytes =
        std::fs::read(spec).map_err(|e| Error::Schema(format!("{}: {e}", spec.display())))?;
    let spec: GeneratorSpec = serde_json::from_slice(&bytes)?;
    let generated = oracle::generate(&spec)?;
    if instance_only {
        // Byte-identical to the canonical serializer, for fixture pinning.
        print!(
            "{}",
            String::from_utf8(serialize_instance(&generated.instance)).expect("utf8 instance")
        );
        return Ok((Value::Null, ExitCode::from(0)));
    }
    let mut doc = json!({"instance": instance_value(&generated.instance)});
    if let Some(costs) = &generated.costs {
        doc["costs"] = serde_json::from_slice(&costs.serialize())?;
    }
    if let Some(candidate) = &generated.candidate {
        doc["candidate"] = solution_to_value(&generated.instance, candidate);
    }
    Ok((doc, ExitCode::from(0)))
}
