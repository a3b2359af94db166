//! Command-line front end.
//!
//! Exit codes: 0 success, 1 when every requested destination was infeasible
//! or unreachable, 2 on input errors, 3 when an internal enumeration guard
//! tripped. Machine-readable output goes to stdout or `--out`; diagnostics
//! to stderr.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::experiments::{self, parse_ms, ExperimentConfig, SpreadingMode};
use crate::oracle;
use crate::solution::{extract_solution_with, SolveOutcome};
use crate::solver::{best2cop_with, Objective, Query, SolveOptions};
use crate::srgraph::{build_sr_graph, constraint_units, AccuracyGrain, SrGraph};
use crate::topology::{NodeId, RawTopology};

#[derive(Parser, Debug)]
#[command(
    name = "best2cop",
    version,
    about = "Delay-constrained least-cost segment lists over SR graphs"
)]
struct Cli {
    /// Edge-list topology file.
    #[arg(long, global = true)]
    topology: Option<PathBuf>,
    /// Delay accuracy: units per millisecond.
    #[arg(long, global = true, default_value_t = 10)]
    grain: u32,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Intra-run parallelism; 1 reproduces the measured sequential setup.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Write machine-readable output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Validate a topology and print its normalized form.
    Parse,
    /// Build the SR graph and dump its edges.
    Srgraph {
        #[arg(long)]
        dump_srgraph: Option<PathBuf>,
    },
    /// Solve 2COP from one source.
    Solve(SolveArgs),
    /// Brute-force reference fronts (small graphs only).
    Oracle {
        #[arg(long)]
        source: String,
        #[arg(long, default_value_t = 10)]
        c0: u32,
        #[arg(long = "c1-ms")]
        c1_ms: String,
    },
    /// Timing and coverage experiment suites.
    Bench {
        #[command(subcommand)]
        kind: BenchKind,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    source: String,
    /// Segment budget.
    #[arg(long, default_value_t = 10)]
    c0: u32,
    /// Delay constraint in milliseconds (decimal).
    #[arg(long = "c1-ms")]
    c1_ms: String,
    /// Optional IGP cost constraint.
    #[arg(long)]
    c2: Option<u64>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::M2)]
    objective: ObjectiveArg,
    #[arg(long, conflicts_with = "all_dests")]
    dest: Option<String>,
    #[arg(long)]
    all_dests: bool,
    /// Dump every front entry as CSV `dest,iter,delay_units,cost`.
    #[arg(long)]
    emit_front: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    /// Fewest segments.
    M0,
    /// Smallest delay.
    M1,
    /// Smallest IGP cost.
    M2,
}

impl From<ObjectiveArg> for Objective {
    fn from(a: ObjectiveArg) -> Self {
        match a {
            ObjectiveArg::M0 => Objective::MinSegments,
            ObjectiveArg::M1 => Objective::MinDelay,
            ObjectiveArg::M2 => Objective::MinCost,
        }
    }
}

#[derive(Subcommand, Debug)]
enum BenchKind {
    /// Random double full-mesh timing grid.
    Fullmesh(BenchArgs),
    /// Delay-spreading sweep.
    Spreading {
        #[command(flatten)]
        common: BenchArgs,
        #[arg(long, value_enum, default_value_t = SpreadingModeArg::Sr)]
        mode: SpreadingModeArg,
    },
    /// Delay-constraint sweep.
    Constraint(BenchArgs),
    /// Coverage classification study.
    Coverage(BenchArgs),
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// key = value experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SpreadingModeArg {
    /// Spreading applied to SR edge weights directly.
    Sr,
    /// Spreading applied to raw link delays before the SR transform.
    Pre,
}

enum CliError {
    Input(String),
    Guard(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Guard(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Guard(m) => m,
        }
    }
}

pub fn run_from_env() -> i32 {
    run(std::env::args())
}

pub fn run<I>(args: I) -> i32
where
    I: IntoIterator,
    I::Item: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    // Graph construction parallelizes over sources through the global pool;
    // solve runs honor --workers on their own.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.max(1))
        .build_global();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    match &cli.cmd {
        Cmd::Parse => {
            let topo = load_topology(cli)?;
            let mut out = open_out(cli.out.as_deref()).map_err(CliError::input)?;
            topo.write(&mut out).map_err(CliError::input)?;
            Ok(0)
        }
        Cmd::Srgraph { dump_srgraph } => {
            let g = load_sr_graph(cli)?;
            eprintln!(
                "{} nodes, {} segments, max edge delay {} units (grain 1/{} ms)",
                g.node_count(),
                g.edge_count(),
                g.max_edge_delay(),
                g.grain().t()
            );
            let target = dump_srgraph.as_deref().or(cli.out.as_deref());
            let mut out = open_out(target).map_err(CliError::input)?;
            g.dump(&mut out).map_err(CliError::input)?;
            Ok(0)
        }
        Cmd::Solve(args) => solve(cli, args),
        Cmd::Oracle { source, c0, c1_ms } => run_oracle(cli, source, *c0, c1_ms),
        Cmd::Bench { kind } => bench(cli, kind),
    }
}

fn load_topology(cli: &Cli) -> Result<RawTopology, CliError> {
    let path = cli
        .topology
        .as_ref()
        .ok_or_else(|| CliError::Input("--topology is required for this command".into()))?;
    let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    RawTopology::parse(BufReader::new(file)).map_err(CliError::input)
}

fn load_sr_graph(cli: &Cli) -> Result<SrGraph, CliError> {
    let topo = load_topology(cli)?;
    let grain = AccuracyGrain::new(cli.grain).map_err(CliError::input)?;
    Ok(build_sr_graph(&topo, grain))
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn node_by_label(g: &SrGraph, label: &str) -> Result<NodeId, CliError> {
    g.node_by_label(label)
        .ok_or_else(|| CliError::Input(format!("unknown node label {label:?}")))
}

fn c1_to_units(c1_ms: &str, grain: AccuracyGrain) -> Result<u64, CliError> {
    let us =
        parse_ms(c1_ms).ok_or_else(|| CliError::Input(format!("bad --c1-ms value {c1_ms:?}")))?;
    Ok(constraint_units(us, grain))
}

/// Formats delay units as decimal milliseconds: exact for power-of-ten
/// grains, nine digits otherwise.
fn units_to_ms(units: u64, grain: AccuracyGrain) -> String {
    let t = grain.t() as u64;
    let int = units / t;
    let mut rem = units % t;
    if rem == 0 {
        return int.to_string();
    }
    let mut frac = String::new();
    for _ in 0..9 {
        rem *= 10;
        let _ = write!(frac, "{}", rem / t);
        rem %= t;
        if rem == 0 {
            break;
        }
    }
    while frac.ends_with('0') {
        frac.pop();
    }
    format!("{int}.{frac}")
}

fn solve(cli: &Cli, args: &SolveArgs) -> Result<i32, CliError> {
    let g = load_sr_graph(cli)?;
    let source = node_by_label(&g, &args.source)?;
    let c1_units = c1_to_units(&args.c1_ms, g.grain())?;
    let dests: Vec<NodeId> = if args.all_dests {
        (0..g.node_count() as u32)
            .map(NodeId)
            .filter(|&v| v != source)
            .collect()
    } else {
        let label = args
            .dest
            .as_ref()
            .ok_or_else(|| CliError::Input("pass --dest <label> or --all-dests".into()))?;
        vec![node_by_label(&g, label)?]
    };

    let query = Query {
        source,
        c0: args.c0,
        c1_units,
        c2: args.c2,
        objective: args.objective.into(),
    };
    let run = best2cop_with(
        &g,
        source,
        &SolveOptions {
            c0: Some(args.c0),
            c1_units,
            workers: cli.workers.max(1),
        },
    );

    if let Some(path) = &args.emit_front {
        let mut w = open_out(Some(path)).map_err(CliError::input)?;
        emit_front(&run, &g, &mut w).map_err(CliError::input)?;
    }

    let reach = g.reachable_from(source);
    let mut out = open_out(cli.out.as_deref()).map_err(CliError::input)?;
    let mut solved_any = false;
    for dest in dests {
        match extract_solution_with(&run, &g, dest, &query, Some(&reach)) {
            SolveOutcome::Solved(sl) => {
                solved_any = true;
                writeln!(
                    out,
                    "{} {} {} {} {}",
                    g.label(dest),
                    sl.seg_count(),
                    units_to_ms(sl.delay_units, g.grain()),
                    sl.cost,
                    sl.format(&g)
                )
                .map_err(CliError::input)?;
            }
            SolveOutcome::Infeasible => {
                writeln!(out, "{} INFEASIBLE", g.label(dest)).map_err(CliError::input)?;
            }
            SolveOutcome::Unreachable => {
                writeln!(out, "{} UNREACHABLE", g.label(dest)).map_err(CliError::input)?;
            }
        }
    }
    Ok(if solved_any { 0 } else { 1 })
}

/// Final per-destination Pareto fronts, one row per entry; the `iter` column
/// is the entry's segment count, so the oracle subcommand emits directly
/// comparable rows.
fn emit_front(
    run: &crate::solver::Best2copResult,
    g: &SrGraph,
    w: &mut impl Write,
) -> io::Result<()> {
    writeln!(w, "dest,iter,delay_units,cost")?;
    for v in 0..g.node_count() as u32 {
        for p in run.final_front(NodeId(v)) {
            writeln!(
                w,
                "{},{},{},{}",
                g.label(NodeId(v)),
                p.segments,
                p.delay,
                p.cost
            )?;
        }
    }
    Ok(())
}

fn run_oracle(cli: &Cli, source: &str, c0: u32, c1_ms: &str) -> Result<i32, CliError> {
    let g = load_sr_graph(cli)?;
    let source = node_by_label(&g, source)?;
    let c1_units = c1_to_units(c1_ms, g.grain())?;
    let fronts = oracle::oracle_fronts(&g, source, c0, c1_units, oracle::DEFAULT_BUDGET)
        .map_err(|e| CliError::Guard(e.to_string()))?;
    let mut out = open_out(cli.out.as_deref()).map_err(CliError::input)?;
    writeln!(out, "dest,iter,delay_units,cost").map_err(CliError::input)?;
    for (v, view) in fronts.iter().enumerate() {
        for p in view {
            writeln!(
                out,
                "{},{},{},{}",
                g.label(NodeId(v as u32)),
                p.segments,
                p.delay,
                p.cost
            )
            .map_err(CliError::input)?;
        }
    }
    Ok(0)
}

fn bench(cli: &Cli, kind: &BenchKind) -> Result<i32, CliError> {
    let common = match kind {
        BenchKind::Fullmesh(c) | BenchKind::Constraint(c) | BenchKind::Coverage(c) => c,
        BenchKind::Spreading { common, .. } => common,
    };
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(CliError::input)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.base_seed = cfg.base_seed.wrapping_add(cli.seed);
    let mut out = open_out(cli.out.as_deref()).map_err(CliError::input)?;
    match kind {
        BenchKind::Fullmesh(_) => {
            experiments::run_fullmesh_suite(&cfg, &mut out).map_err(CliError::input)?;
        }
        BenchKind::Spreading { mode, .. } => {
            let mode = match mode {
                SpreadingModeArg::Sr => SpreadingMode::OnSrGraph,
                SpreadingModeArg::Pre => SpreadingMode::PreSpreading,
            };
            experiments::run_spreading_sweep(mode, &cfg, &mut out).map_err(CliError::input)?;
        }
        BenchKind::Constraint(_) => {
            experiments::run_constraint_sweep(&cfg, &mut out).map_err(CliError::input)?;
        }
        BenchKind::Coverage(_) => {
            experiments::run_coverage_study(&cfg, &mut out).map_err(CliError::input)?;
        }
    }
    Ok(0)
}
