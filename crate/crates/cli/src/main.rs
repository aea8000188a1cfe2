//! `vnep`: generate instances, solve the relaxations, round and compare
//! bounds.
//!
//! Exit codes: 0 success, 1 input or pipeline error, 2 solver budget
//! exhausted.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use vnep::formulations::{build_mcf, build_novel, McfOptions};
use vnep::io::{read_instance, write_instance, MappingDto};
use vnep::lp::{export_lp_file, solve_lp, IpOptions, LpStatus};
use vnep::rounding::{
    prepare, run_heuristic, run_randround, run_vanilla, BoundParameters, Criterion, RandRoundOptions, RoundingContext,
    RoundingOutcome,
};
use vnep::scenarios::{load_substrate, GenerationConfig, ScenarioError};
use vnep::{fixtures, Instance};

/// Version of the CSV layouts; first column of every row.
const CSV_SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "vnep", version, about = "LP-based randomized rounding for virtual network embedding")]
struct Cli {
    /// Worker threads for independent instances and rounding iterations.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    /// Branch-and-bound node budget for every integer program.
    #[arg(long, global = true, env = "VNE_ROUND_BUDGET")]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate(GenerateArgs),
    /// Solve the flow or cactus formulation of an instance.
    Solve(SolveArgs),
    /// Run the rounding pipeline on an instance.
    Round(RoundArgs),
    /// Flow LP, cactus LP and IP objectives per instance.
    CompareBounds(CompareArgs),
    /// Write one of the built-in gap instances.
    Fixture(FixtureArgs),
}

#[derive(clap::Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    requests: usize,
    #[arg(long, default_value_t = 0.6)]
    nrf: f64,
    #[arg(long, default_value_t = 1.0)]
    erf: f64,
    /// `geant`, `ring:<n>` or a substrate JSON file.
    #[arg(long, default_value = "geant")]
    substrate: String,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Formulation {
    Mcf,
    Novel,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Lp,
    Ip,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    formulation: Formulation,
    #[arg(long, value_enum, default_value = "lp")]
    mode: Mode,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the model in CPLEX LP format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Strategy {
    Randround,
    Minload,
    Maxprofit,
    Heuristic,
}

#[derive(clap::Args)]
struct RoundArgs {
    #[arg(long, value_enum)]
    strategy: Strategy,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append a result row, writing the header first if the file is empty.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Defaults to standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FixtureName {
    /// Triangle request on the six-node substrate.
    Triangle,
    /// Edge-restricted triangle: flow LP `b`, cactus LP and IP zero.
    UnboundedGap,
    /// Copies of a two-node cycle request on `ring(n)`.
    RingGap,
}

#[derive(clap::Args)]
struct FixtureArgs {
    #[arg(value_enum)]
    name: FixtureName,
    #[arg(long, default_value_t = 1.0)]
    profit: f64,
    #[arg(long, default_value_t = 8)]
    ring: usize,
    #[arg(long, default_value_t = 4)]
    copies: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An integer program stopped at its node budget.
#[derive(Debug, thiserror::Error)]
#[error("node budget of {budget} exhausted ({what})")]
struct BudgetExceeded {
    budget: usize,
    what: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let budget = e.downcast_ref::<BudgetExceeded>().is_some()
                || matches!(e.downcast_ref::<ScenarioError>(), Some(ScenarioError::Budget(_)));
            ExitCode::from(if budget { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.parallel.max(1))
        .build_global()
        .context("thread pool")?;
    let budget = cli.budget.unwrap_or(IpOptions::default().node_budget);
    let parallel = cli.parallel > 1;
    match cli.command {
        Command::Generate(a) => generate(a, budget),
        Command::Solve(a) => solve(a, budget),
        Command::Round(a) => round(a, parallel),
        Command::CompareBounds(a) => compare_bounds(a, budget),
        Command::Fixture(a) => fixture(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (inst, _) = read_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(inst)
}

fn instance_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn generate(a: GenerateArgs, budget: usize) -> anyhow::Result<()> {
    let substrate = load_substrate(&a.substrate)?;
    let config = GenerationConfig {
        request_count: a.requests,
        nrf: a.nrf,
        erf: a.erf,
        max_depth: a.max_depth,
        seed: a.seed,
        ip_node_budget: budget,
        ..GenerationConfig::default()
    };
    let (inst, info) = vnep::scenarios::generate_instance(&substrate, &config)?;
    for d in &info.dropped {
        eprintln!("dropped {}: {}", d.id, d.reason);
    }
    emit(a.out.as_deref(), &write_instance(&inst, Some(info)))
}

#[derive(Serialize)]
struct SolveReport {
    instance_id: String,
    formulation: Formulation,
    mode: Mode,
    status: String,
    objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    proven_optimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    wall_time_ms: f64,
    variables: BTreeMap<String, f64>,
}

fn solve(a: SolveArgs, budget: usize) -> anyhow::Result<()> {
    let inst = load(&a.input)?;
    let (s, reqs) = (&inst.substrate, &inst.requests);
    let start = Instant::now();
    let (lp, mcf) = match (a.formulation, a.mode) {
        (Formulation::Mcf, mode) => {
            let opts = McfOptions {
                integral: matches!(mode, Mode::Ip),
                ..McfOptions::default()
            };
            let m = build_mcf(reqs, s, &opts)?;
            (m.lp.clone(), Some(m))
        }
        (Formulation::Novel, Mode::Lp) => (build_novel(reqs, s)?.lp, None),
        (Formulation::Novel, Mode::Ip) => bail!("the cactus formulation is solved as an LP only"),
    };
    if let Some(p) = &a.export_lp {
        export_lp_file(&lp, p).with_context(|| format!("writing {}", p.display()))?;
    }
    let mut report = SolveReport {
        instance_id: instance_id(&a.input),
        formulation: a.formulation,
        mode: a.mode,
        status: String::new(),
        objective: 0.0,
        proven_optimal: None,
        gap: None,
        nodes: None,
        wall_time_ms: 0.0,
        variables: BTreeMap::new(),
    };
    let sol = match a.mode {
        Mode::Lp => solve_lp(&lp),
        Mode::Ip => {
            let ip = mcf.as_ref().expect("integer mode builds the flow model").solve_ip(budget)?;
            report.proven_optimal = Some(ip.proven_optimal);
            report.gap = Some(ip.gap);
            report.nodes = Some(ip.nodes);
            ip.solution
        }
    };
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    report.status = format!("{:?}", sol.status);
    report.objective = sol.objective;
    report.variables = sol.assignment().map(|(n, v)| (n.to_string(), *v)).collect();
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    if report.proven_optimal == Some(false) {
        return Err(BudgetExceeded {
            budget,
            what: report.instance_id,
        }
        .into());
    }
    if matches!(sol.status, LpStatus::IterationLimit) {
        bail!("simplex iteration limit reached");
    }
    Ok(())
}

#[derive(Serialize)]
struct EmbeddedRequest {
    request: String,
    mapping: MappingDto,
}

#[derive(Serialize)]
struct RoundReport {
    instance_id: String,
    strategy: Strategy,
    seed: u64,
    iterations: usize,
    lp_objective: f64,
    profit: f64,
    profit_ratio: Option<f64>,
    max_node_load: f64,
    max_edge_load: f64,
    runtime_ms: f64,
    /// Requests surviving preprocessing.
    kept: Vec<String>,
    embedded: Vec<EmbeddedRequest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    accepted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundParameters>,
}

#[derive(Serialize)]
struct RoundRow<'a> {
    schema_version: u32,
    instance_id: &'a str,
    strategy: Strategy,
    seed: u64,
    iterations: usize,
    profit: f64,
    lp_objective: f64,
    profit_ratio: Option<f64>,
    max_node_load: f64,
    max_edge_load: f64,
    runtime_ms: f64,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b.abs() > 1e-12).then(|| a / b)
}

fn round(a: RoundArgs, parallel: bool) -> anyhow::Result<()> {
    let inst = load(&a.input)?;
    let (s, reqs) = (&inst.substrate, &inst.requests);
    let start = Instant::now();
    let p = prepare(reqs, s)?;
    let ctx = RoundingContext::new(reqs, s, p.decompositions.clone());
    let mut accepted = None;
    let mut bounds = None;
    let outcome: RoundingOutcome = match a.strategy {
        Strategy::Randround => {
            let opts = RandRoundOptions {
                max_rounds: a.iterations,
                seed: a.seed,
                ..RandRoundOptions::default()
            };
            let r = run_randround(&ctx, p.lp_objective, &opts)?;
            accepted = Some(r.accepted);
            bounds = Some(r.bounds);
            r.outcome
        }
        Strategy::Minload => run_vanilla(&ctx, a.iterations, Criterion::MinLoad, a.seed, parallel),
        Strategy::Maxprofit => run_vanilla(&ctx, a.iterations, Criterion::MaxProfit, a.seed, parallel),
        Strategy::Heuristic => run_heuristic(&ctx, a.iterations, a.seed, parallel),
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let embedded = outcome
        .choices
        .iter()
        .enumerate()
        .filter_map(|(d, c)| {
            let dec = &ctx.decompositions[d];
            let r = &reqs[dec.request];
            c.map(|k| EmbeddedRequest {
                request: r.id().to_string(),
                mapping: MappingDto::from_mapping(r, s, &dec.entries[k].mapping),
            })
        })
        .collect();
    let report = RoundReport {
        instance_id: instance_id(&a.input),
        strategy: a.strategy,
        seed: a.seed,
        iterations: a.iterations,
        lp_objective: p.lp_objective,
        profit: outcome.profit,
        profit_ratio: ratio(outcome.profit, p.lp_objective),
        max_node_load: outcome.max_node_load,
        max_edge_load: outcome.max_edge_load,
        runtime_ms,
        kept: p.kept.iter().map(|&i| reqs[i].id().to_string()).collect(),
        embedded,
        accepted,
        bounds,
    };
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    if let Some(path) = &a.csv {
        let row = RoundRow {
            schema_version: CSV_SCHEMA,
            instance_id: &report.instance_id,
            strategy: report.strategy,
            seed: report.seed,
            iterations: report.iterations,
            profit: report.profit,
            lp_objective: report.lp_objective,
            profit_ratio: report.profit_ratio,
            max_node_load: report.max_node_load,
            max_edge_load: report.max_edge_load,
            runtime_ms: report.runtime_ms,
        };
        append_csv(path, &[row])?;
    }
    Ok(())
}

fn append_csv<R: Serialize>(path: &Path, rows: &[R]) -> anyhow::Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let fresh = file.metadata()?.len() == 0;
    write_csv(file, rows, fresh)
}

fn write_csv<R: Serialize, W: Write>(out: W, rows: &[R], header: bool) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BoundsRow {
    schema_version: u32,
    instance_id: String,
    mcf_lp: f64,
    novel_lp: f64,
    ip: f64,
    ip_proven: bool,
    mcf_over_ip: Option<f64>,
    novel_over_ip: Option<f64>,
    mcf_over_novel: Option<f64>,
}

fn bounds_row(path: &Path, budget: usize) -> anyhow::Result<BoundsRow> {
    let inst = load(path)?;
    let (s, reqs) = (&inst.substrate, &inst.requests);
    let lp_value = |lp: &vnep::Lp| -> anyhow::Result<f64> {
        let sol = solve_lp(lp);
        if sol.status != LpStatus::Optimal {
            bail!("{}: LP ended with status {:?}", path.display(), sol.status);
        }
        Ok(sol.objective)
    };
    let mcf_lp = lp_value(&build_mcf(reqs, s, &McfOptions::default())?.lp)?;
    let novel_lp = lp_value(&build_novel(reqs, s)?.lp)?;
    let opts = McfOptions {
        integral: true,
        ..McfOptions::default()
    };
    let ip = build_mcf(reqs, s, &opts)?.solve_ip(budget)?;
    let ip_value = match ip.solution.status {
        LpStatus::Optimal => ip.solution.objective,
        _ => 0.0,
    };
    Ok(BoundsRow {
        schema_version: CSV_SCHEMA,
        instance_id: instance_id(path),
        mcf_lp,
        novel_lp,
        ip: ip_value,
        ip_proven: ip.proven_optimal,
        mcf_over_ip: ratio(mcf_lp, ip_value),
        novel_over_ip: ratio(novel_lp, ip_value),
        mcf_over_novel: ratio(mcf_lp, novel_lp),
    })
}

fn compare_bounds(a: CompareArgs, budget: usize) -> anyhow::Result<()> {
    let mut rows = a
        .inputs
        .par_iter()
        .map(|p| bounds_row(p, budget))
        .collect::<anyhow::Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.instance_id.cmp(&y.instance_id));
    match &a.csv {
        Some(p) => write_csv(File::create(p).with_context(|| format!("creating {}", p.display()))?, &rows, true)?,
        None => write_csv(std::io::stdout().lock(), &rows, true)?,
    }
    let unproven: Vec<&str> = rows.iter().filter(|r| !r.ip_proven).map(|r| r.instance_id.as_str()).collect();
    if !unproven.is_empty() {
        return Err(BudgetExceeded {
            budget,
            what: unproven.join(", "),
        }
        .into());
    }
    Ok(())
}

fn fixture(a: FixtureArgs) -> anyhow::Result<()> {
    let inst = match a.name {
        FixtureName::Triangle => {
            let mut inst = fixtures::triangle_instance();
            let r = inst.requests[0].to_builder(&inst.substrate).profit(a.profit).build(&inst.substrate)?;
            inst.requests[0] = r;
            inst
        }
        FixtureName::UnboundedGap => fixtures::unbounded_gap_instance(a.profit),
        FixtureName::RingGap => {
            if a.ring < 3 || a.copies == 0 {
                bail!("ring-gap needs --ring >= 3 and --copies >= 1");
            }
            fixtures::ring_gap_instance(a.ring, a.copies, a.profit)
        }
    };
    emit(a.out.as_deref(), &write_instance(&inst, None))
}
