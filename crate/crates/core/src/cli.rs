//! Command-line orchestration: parse inputs, dispatch to the library,
//! emit machine-readable JSON reports.
//!
//! Reports have the shape `{"command", "result", "meta"}`; everything
//! under `result` is byte-identical for a fixed configuration and seed
//! (for any `--threads` value), while wall-clock timing lives in `meta`.
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use serde_json::{json, Value};

use crate::arithmetic::{
    corners_to_tripartite, count_aps, count_corners, FiniteShiftSystem, GridSet, ZnSet,
};
use crate::embedding::{
    embed_prob_exact, embed_prob_mc, furstenberg_prob, parse_event, ExactOptions,
    FurstenbergInstance,
};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, MotifSpec};
use crate::limits::{
    density_vector, diagonal_subsequence, regularity_defect_curve, DefectEstimator, DensityMode,
    DensityTable,
};
use crate::probspace::Scalar;
use crate::removal::{
    remove_copies_greedy, remove_triangles_partition, strong_removal_partition, BlockVerdict,
    RemovalResult, Verification,
};
use crate::report::{biguint_value, rational_value};
use crate::uip::{uip_construct, SolveMode, UipProblemJson, UipSolutionJson};

const EVENT_GRAMMAR: &str = "\
Event mini-language:
  event := or
  or    := and ('|' and)*
  and   := unary ('&' unary)*
  unary := '!' unary | 'A' '(' int (',' int)* ')' | 'A' '[' int ']' | '(' or ')'

Edge leaves A(i,j,...) use 1-based sampled-vertex indices and hold when
the sampled vertices are pairwise distinct and form an edge. Offset
leaves A[n] address the cyclic embedding and accept any integer offset.

Motif specs: 'edge', 'path2', 'triangle', 'k4', or 'file:PATH' with a
hypergraph file whose vertices 0..v0-1 become motif labels 1..v0.";

#[derive(Parser, Debug)]
#[command(
    name = "removal-lab",
    about = "Exact counting, universal-embedding densities, UIP construction, and removal algorithms on finite (hyper)graphs",
    version,
    after_long_help = EVENT_GRAMMAR
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for parallel counting (0 = automatic). The result
    /// is identical for any value.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Report destination ('-' = stdout).
    #[arg(long, global = true, default_value = "-")]
    pub output: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact motif, progression, or corner counts.
    Count(CountArgs),
    /// Embedding probabilities of a regular event (exact or Monte Carlo).
    Embed(EmbedArgs),
    /// Removal algorithms with certified motif-freeness.
    Remove(RemoveArgs),
    /// Load a UIP problem, construct a solution, validate it.
    UipDemo(UipDemoArgs),
    /// Density tables over graph sequences plus subsequence extraction.
    Converge(ConvergeArgs),
    /// Polling (regularity) defect curve.
    Regcurve(RegcurveArgs),
    /// Commuting-shift system identities.
    Shiftsys(ShiftsysArgs),
}

#[derive(Args, Debug)]
pub struct CountArgs {
    /// Hypergraph file; count labeled copies of --motif.
    #[arg(long, conflicts_with_all = ["znset", "grid"])]
    pub graph: Option<String>,
    /// Motif spec (with --graph).
    #[arg(long)]
    pub motif: Option<String>,
    /// Z_N set file; count k-term progressions.
    #[arg(long, conflicts_with = "grid")]
    pub znset: Option<String>,
    /// Progression length (with --znset).
    #[arg(long, default_value_t = 3)]
    pub ap_length: usize,
    /// Grid set file; count corners.
    #[arg(long)]
    pub grid: Option<String>,
    /// Exclude the degenerate r = 0 patterns.
    #[arg(long)]
    pub no_degenerate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    Exact,
    Mc,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// Hypergraph file (graph/hypergraph embedding).
    #[arg(long, conflicts_with = "znset")]
    pub graph: Option<String>,
    /// Z_N set file (cyclic embedding; exact only).
    #[arg(long, requires = "scale")]
    pub znset: Option<String>,
    /// Dilation scale m (with --znset).
    #[arg(long)]
    pub scale: Option<u64>,
    /// Event in the mini-language.
    #[arg(long)]
    pub event: String,
    #[arg(long, value_enum, default_value_t = EvalMode::Exact)]
    pub mode: EvalMode,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Seed (required for Monte Carlo).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumeration cap on the event arity for exact mode.
    #[arg(long, default_value_t = 6)]
    pub max_arity: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RemoveMethod {
    Greedy,
    Partition,
    Strong,
}

#[derive(Args, Debug)]
pub struct RemoveArgs {
    /// Hypergraph file.
    #[arg(long)]
    pub graph: String,
    /// Motif spec (greedy method; the partition methods fix the triangle).
    #[arg(long, default_value = "triangle")]
    pub motif: String,
    #[arg(long, value_enum, default_value_t = RemoveMethod::Greedy)]
    pub method: RemoveMethod,
    /// Block density threshold for the partition methods.
    #[arg(long, default_value_t = 0.4)]
    pub tau: f64,
    /// Poll-set size for the partition methods.
    #[arg(long, default_value_t = 6)]
    pub poll_size: usize,
    /// Seed (required for the partition methods).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct UipDemoArgs {
    /// Problem JSON file.
    #[arg(long, required_unless_present = "emit_example")]
    pub problem: Option<String>,
    /// Tolerate hypothesis defects up to --tol; emptiness stays mandatory.
    #[arg(long)]
    pub best_effort: bool,
    /// Hypothesis tolerance for --best-effort, as 'num/den'.
    #[arg(long, default_value = "1/100")]
    pub tol: String,
    /// Write the built-in worked example problem to this path and exit.
    #[arg(long)]
    pub emit_example: Option<String>,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    /// Hypergraph files, one row each (repeatable).
    #[arg(long = "graph", required = true)]
    pub graphs: Vec<String>,
    /// Events in the mini-language (repeatable).
    #[arg(long = "event", required = true)]
    pub events: Vec<String>,
    #[arg(long, value_enum, default_value_t = EvalMode::Exact)]
    pub mode: EvalMode,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 6)]
    pub max_arity: usize,
    /// Subsequence tolerance, as 'num/den' (exact) or a decimal.
    #[arg(long, default_value = "1/20")]
    pub tol: String,
    /// Also write the density table as CSV to this path.
    #[arg(long)]
    pub csv: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveEstimator {
    /// Empirical joint law from sampled triples.
    Empirical,
    /// Exact joint law given each trial's sampled poll set.
    Exact,
}

#[derive(Args, Debug)]
pub struct RegcurveArgs {
    /// Hypergraph file.
    #[arg(long, conflicts_with = "gnp")]
    pub graph: Option<String>,
    /// Random graph 'n,p' generated from the seed.
    #[arg(long)]
    pub gnp: Option<String>,
    /// Poll sizes, comma separated.
    #[arg(long, default_value = "0,2,4,8")]
    pub poll_sizes: String,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Triple samples per trial (empirical estimator).
    #[arg(long, default_value_t = 4000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = CurveEstimator::Empirical)]
    pub estimator: CurveEstimator,
    /// Seed (required).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ShiftsysArgs {
    /// Grid set file (the marked subset of the torus).
    #[arg(long)]
    pub grid: String,
    /// Exponent bound N of the tripartite sampling.
    #[arg(long, default_value_t = 2)]
    pub exponent_bound: u64,
    /// Window half-width for the symmetric recurrence average.
    #[arg(long, default_value_t = 4)]
    pub window: u64,
    /// Also report the corners-to-tripartite reduction check.
    #[arg(long)]
    pub check_reduction: bool,
}

/// A finished report: deterministic `result`, timing-bearing `meta`.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub result: Value,
    pub meta: Value,
}

impl Report {
    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "result": self.result,
            "meta": self.meta,
        })
    }

    /// Canonical serialization of the deterministic part.
    pub fn result_bytes(&self) -> String {
        serde_json::to_string_pretty(&self.result).expect("result serializes")
    }
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match dispatch(cli) {
        Ok(report) => {
            let text =
                serde_json::to_string_pretty(&report.to_value()).expect("report serializes");
            match write_output(&output, &text) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    } else {
        std::fs::write(path, format!("{text}\n"))?;
        Ok(())
    }
}

/// Runs one command under the requested thread pool and wraps the result.
pub fn dispatch(cli: Cli) -> Result<Report> {
    let start = Instant::now();
    let threads = cli.threads;
    let run = || -> Result<(String, Value)> {
        match &cli.command {
            Command::Count(args) => Ok(("count".into(), run_count(args)?)),
            Command::Embed(args) => Ok(("embed".into(), run_embed(args)?)),
            Command::Remove(args) => Ok(("remove".into(), run_remove(args)?)),
            Command::UipDemo(args) => Ok(("uip-demo".into(), run_uip_demo(args)?)),
            Command::Converge(args) => Ok(("converge".into(), run_converge(args)?)),
            Command::Regcurve(args) => Ok(("regcurve".into(), run_regcurve(args)?)),
            Command::Shiftsys(args) => Ok(("shiftsys".into(), run_shiftsys(args)?)),
        }
    };
    let (command, result) = if threads == 0 {
        run()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::input(format!("cannot build thread pool: {e}")))?;
        pool.install(run)?
    };
    Ok(Report {
        command,
        result,
        meta: json!({
            "elapsed_ms": start.elapsed().as_millis() as u64,
            "threads": threads,
        }),
    })
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read '{path}': {e}")))
}

fn load_graph(path: &str) -> Result<Hypergraph> {
    Hypergraph::from_text(&read_file(path)?)
}

fn parse_motif(spec: &str, d: usize) -> Result<MotifSpec> {
    match spec {
        "edge" => Ok(MotifSpec::single_edge(d)),
        "path2" => Ok(MotifSpec::path2()),
        "triangle" => Ok(MotifSpec::triangle()),
        "k4" => Ok(MotifSpec::k4()),
        other => match other.strip_prefix("file:") {
            Some(path) => MotifSpec::from_hypergraph(&load_graph(path)?),
            None => Err(Error::input(format!(
                "unknown motif '{other}' (expected edge|path2|triangle|k4|file:PATH)"
            ))),
        },
    }
}

/// Parses 'num/den', an integer, or a finite decimal as an exact rational.
fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::input(format!("invalid rational '{text}'"));
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let digits = frac.trim();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = if whole.trim().is_empty() {
            BigInt::zero()
        } else {
            whole.trim().parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac: BigInt = digits.parse().map_err(|_| bad())?;
        let sign = if text.trim_start().starts_with('-') {
            -BigInt::from(1)
        } else {
            BigInt::from(1)
        };
        return Ok(BigRational::new(whole * &scale + sign * frac, scale));
    }
    let n: BigInt = text.trim().parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| {
        Error::input(format!(
            "{what} is stochastic: pass --seed explicitly (no silent nondeterminism)"
        ))
    })
}

fn run_count(args: &CountArgs) -> Result<Value> {
    let include_degenerate = !args.no_degenerate;
    if let Some(path) = &args.graph {
        let graph = load_graph(path)?;
        let motif_spec = args
            .motif
            .as_deref()
            .ok_or_else(|| Error::input("--motif is required with --graph"))?;
        let motif = parse_motif(motif_spec, graph.d())?;
        let count = graph.count_labeled_copies(&motif)?;
        return Ok(json!({
            "kind": "motif",
            "motif": motif_spec,
            "count": biguint_value(&count),
        }));
    }
    if let Some(path) = &args.znset {
        let set = ZnSet::from_text(&read_file(path)?)?;
        let count = count_aps(&set, args.ap_length, include_degenerate)?;
        return Ok(json!({
            "kind": "progressions",
            "modulus": set.modulus(),
            "set_size": set.len(),
            "length": args.ap_length,
            "include_degenerate": include_degenerate,
            "count": biguint_value(&count),
        }));
    }
    if let Some(path) = &args.grid {
        let set = GridSet::from_text(&read_file(path)?)?;
        let count = count_corners(&set, include_degenerate);
        return Ok(json!({
            "kind": "corners",
            "side": set.side(),
            "set_size": set.len(),
            "include_degenerate": include_degenerate,
            "count": biguint_value(&count),
        }));
    }
    Err(Error::input("pass one of --graph, --znset, --grid"))
}

fn run_embed(args: &EmbedArgs) -> Result<Value> {
    if let Some(path) = &args.znset {
        let set = ZnSet::from_text(&read_file(path)?)?;
        let scale = args.scale.expect("clap enforces --scale with --znset");
        let inst = FurstenbergInstance::new(set.modulus(), &set.elements(), scale)?;
        let event = parse_event(&args.event)?;
        let p = furstenberg_prob(&inst, &event)?;
        return Ok(json!({
            "embedding": "cyclic",
            "modulus": inst.modulus(),
            "scale": inst.scale(),
            "dilation_bound": inst.dilation_bound(),
            "event": event.to_string(),
            "p": rational_value(&p),
        }));
    }
    let path = args
        .graph
        .as_deref()
        .ok_or_else(|| Error::input("pass --graph or --znset"))?;
    let graph = load_graph(path)?;
    let event = parse_event(&args.event)?;
    match args.mode {
        EvalMode::Exact => {
            let p = embed_prob_exact(
                &graph,
                &event,
                ExactOptions {
                    max_arity: args.max_arity,
                },
            )?;
            Ok(json!({
                "embedding": "graph",
                "event": event.to_string(),
                "mode": "exact",
                "p": rational_value(&p),
            }))
        }
        EvalMode::Mc => {
            let seed = require_seed(args.seed, "embed --mode mc")?;
            let est = embed_prob_mc(&graph, &event, args.samples, seed)?;
            Ok(json!({
                "embedding": "graph",
                "event": event.to_string(),
                "mode": "mc",
                "estimate": est.estimate,
                "std_error": est.std_error,
                "successes": est.successes,
                "samples": est.samples,
                "seed": seed,
            }))
        }
    }
}

fn removal_result_json(result: &RemovalResult) -> Value {
    let residual = match &result.verification {
        Verification::Free { residual } => biguint_value(residual),
        Verification::TrivialMotif => json!(0),
    };
    json!({
        "method": result.method.name(),
        "deletions": result.deleted.len(),
        "deleted": result.deleted,
        "residual_count": residual,
        "trivial_motif": matches!(result.verification, Verification::TrivialMotif),
        "phase": result.phase.map(|p| json!({
            "density_deletions": p.density_deletions,
            "fallback_deletions": p.fallback_deletions,
        })),
        "surviving_edges": result.survivor.edge_count(),
        "budget_split_factor": biguint_value(&result.budget_split_factor),
    })
}

fn run_remove(args: &RemoveArgs) -> Result<Value> {
    let graph = load_graph(&args.graph)?;
    match args.method {
        RemoveMethod::Greedy => {
            let motif = parse_motif(&args.motif, graph.d())?;
            let result = remove_copies_greedy(&graph, &motif)?;
            Ok(removal_result_json(&result))
        }
        RemoveMethod::Partition => {
            let seed = require_seed(args.seed, "remove --method partition")?;
            let result = remove_triangles_partition(&graph, args.poll_size, args.tau, seed)?;
            let mut value = removal_result_json(&result);
            value["seed"] = json!(seed);
            Ok(value)
        }
        RemoveMethod::Strong => {
            let seed = require_seed(args.seed, "remove --method strong")?;
            let report = strong_removal_partition(&graph, args.poll_size, args.tau, seed)?;
            let parts: Vec<usize> = report.description.parts.iter().map(|p| p.len()).collect();
            let verdicts: BTreeMap<String, &'static str> = report
                .description
                .verdicts
                .iter()
                .map(|((a, b), v)| {
                    let name = match v {
                        BlockVerdict::Complete => "complete",
                        BlockVerdict::Empty => "empty",
                    };
                    (format!("{a},{b}"), name)
                })
                .collect();
            let residual = match &report.verification {
                Verification::Free { residual } => biguint_value(residual),
                Verification::TrivialMotif => json!(0),
            };
            Ok(json!({
                "method": "strong-partition",
                "parts": parts,
                "verdicts": verdicts,
                "diff_size": report.diff_size,
                "demotions": report.demotions,
                "residual_count": residual,
                "seed": seed,
            }))
        }
    }
}

/// The worked 3-point example instance, also exposed for `--emit-example`.
pub fn worked_example_problem_json() -> UipProblemJson {
    use crate::probspace::{Factor, Mode, ProbSpace};
    use crate::uip::{Downset, FactorSystem, UipProblem};
    let space = ProbSpace::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            Scalar::ratio(1, 2),
            Scalar::ratio(1, 2),
            Scalar::ratio(0, 1),
        ],
        Mode::Rational,
    )
    .unwrap();
    let i_max = Downset::new(2, [0b00, 0b01, 0b10]).unwrap();
    let mut factors = BTreeMap::new();
    factors.insert(0b00, Factor::trivial(&space));
    factors.insert(
        0b01,
        Factor::from_blocks(&space, &[vec![0], vec![1, 2]]).unwrap(),
    );
    factors.insert(
        0b10,
        Factor::from_blocks(&space, &[vec![0, 1], vec![2]]).unwrap(),
    );
    let system = FactorSystem::new(space.clone(), i_max, factors).unwrap();
    let mut events = BTreeMap::new();
    events.insert(0b00, crate::probspace::Event::full(&space));
    events.insert(
        0b01,
        crate::probspace::Event::from_indices(&space, &[1, 2]).unwrap(),
    );
    events.insert(
        0b10,
        crate::probspace::Event::from_indices(&space, &[2]).unwrap(),
    );
    let problem = UipProblem::new(system, events, BigRational::new(1.into(), 10.into())).unwrap();
    UipProblemJson::from_problem(&problem)
}

fn run_uip_demo(args: &UipDemoArgs) -> Result<Value> {
    if let Some(path) = &args.emit_example {
        let text = serde_json::to_string_pretty(&worked_example_problem_json())?;
        std::fs::write(path, format!("{text}\n"))?;
        return Ok(json!({ "emitted_example": path }));
    }
    let path = args.problem.as_deref().expect("clap enforces --problem");
    let problem_json: UipProblemJson = serde_json::from_str(&read_file(path)?)?;
    let problem = problem_json.to_problem()?;
    let mode = if args.best_effort {
        SolveMode::BestEffort {
            tolerance: Scalar::Rat(parse_rational(&args.tol)?),
        }
    } else {
        SolveMode::Certified
    };
    let tolerance = match &mode {
        SolveMode::Certified => Scalar::ratio(0, 1),
        SolveMode::BestEffort { tolerance } => tolerance.clone(),
    };
    let hypotheses = problem.system().check_hypotheses(&tolerance, 2)?;
    let solution = uip_construct(&problem, &mode)?;
    let solution_json = UipSolutionJson::from_solution(&solution)?;
    Ok(json!({
        "members": problem.system().index_set().members().collect::<Vec<_>>(),
        "epsilon": rational_value(problem.epsilon()),
        "joint_prob_of_inputs": solution_value_of(&problem.joint_prob()?),
        "hypotheses": {
            "nesting_ok": hypotheses.nesting_ok,
            "max_defect": hypotheses.max_defect.to_f64(),
            "crop_max_defect": hypotheses.crop_max_defect.to_f64(),
            "crop_checks": hypotheses.crop_checks,
            "ok": hypotheses.ok,
        },
        "solution": serde_json::to_value(&solution_json)?,
    }))
}

fn solution_value_of(s: &Scalar) -> Value {
    match s.as_rational() {
        Some(r) => rational_value(r),
        None => json!(s.to_f64()),
    }
}

fn run_converge(args: &ConvergeArgs) -> Result<Value> {
    let events: Vec<_> = args
        .events
        .iter()
        .map(|text| parse_event(text))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = events.iter().map(|e| e.to_string()).collect();
    let mode = match args.mode {
        EvalMode::Exact => DensityMode::Exact(ExactOptions {
            max_arity: args.max_arity,
        }),
        EvalMode::Mc => DensityMode::MonteCarlo {
            samples: args.samples,
            seed: require_seed(args.seed, "converge --mode mc")?,
        },
    };
    let mut rows = Vec::new();
    for path in &args.graphs {
        let graph = load_graph(path)?;
        rows.push(density_vector(&graph, &events, mode)?);
    }
    let table = DensityTable::new(labels.clone(), rows)?;
    let tol = match args.mode {
        EvalMode::Exact => Scalar::Rat(parse_rational(&args.tol)?),
        EvalMode::Mc => Scalar::F64(crate::report::rational_to_f64(&parse_rational(&args.tol)?)),
    };
    let subsequence = diagonal_subsequence(&table, &tol)?;
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, table.to_csv())?;
    }
    let rows_json: Vec<Vec<Value>> = table
        .rows
        .iter()
        .map(|row| row.iter().map(solution_value_of).collect())
        .collect();
    Ok(json!({
        "events": labels,
        "graphs": args.graphs,
        "rows": rows_json,
        "surviving_rows": subsequence.indices,
        "degenerate": subsequence.degenerate,
    }))
}

fn run_regcurve(args: &RegcurveArgs) -> Result<Value> {
    let seed = require_seed(args.seed, "regcurve")?;
    let graph = match (&args.graph, &args.gnp) {
        (Some(path), None) => load_graph(path)?,
        (None, Some(spec)) => {
            let (n, p) = spec
                .split_once(',')
                .ok_or_else(|| Error::input("--gnp expects 'n,p'"))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::input("--gnp expects an integer vertex count"))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::input("--gnp expects a float probability"))?;
            Hypergraph::random(n, 2, p, crate::rng::mix(seed, 0xC0FFEE))?
        }
        _ => return Err(Error::input("pass exactly one of --graph or --gnp")),
    };
    let poll_sizes: Vec<usize> = args
        .poll_sizes
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::input(format!("invalid poll size '{t}'")))
        })
        .collect::<Result<_>>()?;
    let estimator = match args.estimator {
        CurveEstimator::Empirical => DefectEstimator::Empirical {
            samples: args.samples,
        },
        CurveEstimator::Exact => DefectEstimator::ExactGivenPolls,
    };
    let curve = regularity_defect_curve(&graph, &poll_sizes, args.trials, estimator, seed)?;
    let points: Vec<Value> = curve
        .iter()
        .map(|p| {
            json!({
                "poll_size": p.poll_size,
                "mean_defect": p.mean_defect,
                "per_trial": p.per_trial,
            })
        })
        .collect();
    Ok(json!({
        "n": graph.n(),
        "edges": graph.edge_count(),
        "trials": args.trials,
        "estimator": match args.estimator {
            CurveEstimator::Empirical => "empirical",
            CurveEstimator::Exact => "exact",
        },
        "samples_per_trial": args.samples,
        "seed": seed,
        "curve": points,
    }))
}

fn run_shiftsys(args: &ShiftsysArgs) -> Result<Value> {
    let set = GridSet::from_text(&read_file(&args.grid)?)?;
    let sys = FiniteShiftSystem::new(set.clone());
    let n = args.exponent_bound;
    let lhs = sys.tripartite_embed_prob(n)?;
    let rhs = sys.tripartite_identity_rhs(n)?;
    let bound = sys.tripartite_inequality_rhs(n)?;
    let identity_holds = lhs == rhs;
    let inequality_holds = lhs <= bound;

    let w = args.window as i64;
    let recurrence: Vec<Value> = (-w..=w)
        .map(|k| json!({ "n": k, "p": rational_value(&sys.recurrence_prob(k)) }))
        .collect();
    let window_average = sys.recurrence_window_average(args.window);

    let reduction = if args.check_reduction {
        let graph = corners_to_tripartite(&set)?;
        let triangles = graph.triangle_count()?;
        let corners = count_corners(&set, true);
        let consistent =
            triangles == num::bigint::BigUint::from(6u32) * corners.clone();
        Some(json!({
            "ordered_triangles": biguint_value(&triangles),
            "corners": biguint_value(&corners),
            "consistent": consistent,
        }))
    } else {
        None
    };

    let result = json!({
        "side": set.side(),
        "set_size": set.len(),
        "exponent_bound": n,
        "tripartite": rational_value(&lhs),
        "identity_rhs": rational_value(&rhs),
        "identity_holds": identity_holds,
        "inequality_rhs": rational_value(&bound),
        "inequality_holds": inequality_holds,
        "recurrence": recurrence,
        "window": args.window,
        "window_average": rational_value(&window_average),
        "reduction": reduction,
    });
    if !identity_holds || !inequality_holds {
        return Err(Error::verification(format!(
            "shift-system identities failed: identity={identity_holds} inequality={inequality_holds}"
        )));
    }
    if let Some(reduction) = result.get("reduction").and_then(|r| r.as_object()) {
        if reduction.get("consistent") == Some(&json!(false)) {
            return Err(Error::verification("reduction identity failed"));
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/10").unwrap(), BigRational::new(1.into(), 10.into()));
        assert_eq!(parse_rational("3").unwrap(), BigRational::from_integer(3.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(
            parse_rational("-0.5").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
