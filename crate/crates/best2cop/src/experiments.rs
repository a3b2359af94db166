//! Evaluation harness: seeded graph generation, warmed-up wall-clock timing
//! of the solver alone, and stable CSV output.
//!
//! Timing columns vary between machines; every other column is reproducible
//! bit-for-bit for a given seed.

use std::collections::HashMap;
use std::io::{self, Write};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::solver::{
    best2cop, best2cop_unbounded, coverage_from_run, Best2copResult, CoverageClass,
};
use crate::srgraph::{
    build_sr_graph, constraint_units, generate_random_sr_graph, AccuracyGrain, SrGraph,
};
use crate::topology::{NodeId, RawLink, RawTopology, SUBGRAIN_PER_MS};

/// IGP cost values observed on production links: reference-bandwidth tiers
/// rather than arbitrary 24-bit integers.
const ISP_COST_PALETTE: [u32; 7] = [1, 2, 5, 10, 20, 50, 100];

/// Sparse stand-in for a real ISP topology: strongly connected, |V| nodes and
/// |E| links, realistic tiered IGP costs, delays uniform in (0, max_delay_us].
/// Real networks carry small aligned cost values; drawing costs uniformly
/// from the full 24-bit range would swamp the delay-spreading effects this
/// stand-in exists to exhibit.
pub fn generate_isp_standin(
    n_nodes: usize,
    n_links: usize,
    max_delay_us: u64,
    seed: u64,
) -> RawTopology {
    assert!(
        n_nodes >= 2 && n_links >= n_nodes,
        "stand-in must be connectable"
    );
    assert!(max_delay_us >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut topo = RawTopology::new();
    for i in 0..n_nodes {
        topo.intern(&format!("n{i}"));
    }
    let mut order: Vec<u32> = (0..n_nodes as u32).collect();
    order.shuffle(&mut rng);
    let mut iface_count: HashMap<(u32, u32), u32> = HashMap::new();
    let mut add = |topo: &mut RawTopology, rng: &mut ChaCha8Rng, src: u32, dst: u32| {
        let slot = iface_count.entry((src, dst)).or_insert(0);
        let interface = *slot;
        *slot += 1;
        topo.add_link(RawLink {
            src: NodeId(src),
            dst: NodeId(dst),
            interface,
            delay_us: rng.gen_range(1..=max_delay_us),
            igp_cost: *ISP_COST_PALETTE.choose(rng).expect("palette is non-empty"),
        });
    };
    for i in 0..n_nodes {
        add(&mut topo, &mut rng, order[i], order[(i + 1) % n_nodes]);
    }
    for _ in n_nodes..n_links {
        let src = rng.gen_range(0..n_nodes as u32);
        let dst = loop {
            let d = rng.gen_range(0..n_nodes as u32);
            if d != src {
                break d;
            }
        };
        add(&mut topo, &mut rng, src, dst);
    }
    topo
}

pub const TIMING_HEADER: &str =
    "experiment,vertices,spreading,seed,source,c0,c1_units,time_ns,iters,front_size";
pub const COVERAGE_HEADER: &str = "experiment,source,dest,c1_units,iters_needed,class";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Full-mesh sizes to sweep.
    pub sizes: Vec<usize>,
    /// Delay spreadings; doubles as the s2 sweep for spreading runs.
    pub spreadings: Vec<u64>,
    pub seeds_per_point: u64,
    pub base_seed: u64,
    /// Fraction of nodes used as sources per graph.
    pub sources_fraction: f64,
    pub c0: u32,
    /// Delay constraint in 0.001 ms units.
    pub c1_us: u64,
    pub grain: AccuracyGrain,
    pub warmup_runs: u32,
    /// Single-graph experiments (spreading on SR, constraint sweep).
    pub vertices: usize,
    /// Raw stand-in shape for pre-spreading and coverage runs.
    pub n_nodes: usize,
    pub n_links: usize,
    /// Constraint sweep values, 0.001 ms units.
    pub c1_values_us: Vec<u64>,
    /// Maximum raw link delay for coverage stand-ins, 0.001 ms units.
    pub max_delay_us: u64,
    pub segmax: u32,
    /// Number of sources for single-graph experiments.
    pub sources: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sizes: vec![100],
            spreadings: vec![100, 500, 1000],
            seeds_per_point: 3,
            base_seed: 0,
            sources_fraction: 0.1,
            c0: 10,
            c1_us: 100_000,
            grain: AccuracyGrain::default(),
            warmup_runs: 1,
            vertices: 500,
            n_nodes: 1100,
            n_links: 3000,
            c1_values_us: vec![100, 1_000, 10_000, 100_000],
            max_delay_us: 7_000,
            segmax: 10,
            sources: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {0}: expected `key = value`")]
    Shape(usize),
    #[error("config line {line}: bad value for {key}: {msg}")]
    Value {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("config: unknown key {0:?}")]
    UnknownKey(String),
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` comments; lists are comma-separated.
    /// Millisecond values accept decimals down to 0.001 ms.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Shape(lineno))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |msg: &str| ConfigError::Value {
                line: lineno,
                key: key.to_string(),
                msg: msg.to_string(),
            };
            match key {
                "sizes" => cfg.sizes = parse_list(value).map_err(|m| bad(&m))?,
                "spreadings" => cfg.spreadings = parse_list(value).map_err(|m| bad(&m))?,
                "seeds_per_point" => {
                    cfg.seeds_per_point = value.parse().map_err(|_| bad("integer"))?
                }
                "base_seed" => cfg.base_seed = value.parse().map_err(|_| bad("integer"))?,
                "sources_fraction" => {
                    let f: f64 = value.parse().map_err(|_| bad("decimal"))?;
                    if !(f > 0.0 && f <= 1.0) {
                        return Err(bad("must be in (0, 1]"));
                    }
                    cfg.sources_fraction = f;
                }
                "c0" => cfg.c0 = value.parse().map_err(|_| bad("integer"))?,
                "c1_ms" => cfg.c1_us = parse_ms(value).ok_or_else(|| bad("milliseconds"))?,
                "grain" => {
                    let t: u32 = value.parse().map_err(|_| bad("integer"))?;
                    cfg.grain = AccuracyGrain::new(t).map_err(|_| bad("grain >= 1"))?;
                }
                "warmup_runs" => cfg.warmup_runs = value.parse().map_err(|_| bad("integer"))?,
                "vertices" => cfg.vertices = value.parse().map_err(|_| bad("integer"))?,
                "n_nodes" => cfg.n_nodes = value.parse().map_err(|_| bad("integer"))?,
                "n_links" => cfg.n_links = value.parse().map_err(|_| bad("integer"))?,
                "c1_values_ms" => {
                    cfg.c1_values_us = value
                        .split(',')
                        .map(|v| parse_ms(v.trim()).ok_or_else(|| bad("milliseconds list")))
                        .collect::<Result<_, _>>()?;
                }
                "max_delay_ms" => {
                    cfg.max_delay_us = parse_ms(value).ok_or_else(|| bad("milliseconds"))?
                }
                "segmax" => cfg.segmax = value.parse().map_err(|_| bad("integer"))?,
                "sources" => cfg.sources = value.parse().map_err(|_| bad("integer"))?,
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        Ok(cfg)
    }

    fn sources_for(&self, vertices: usize) -> usize {
        ((vertices as f64 * self.sources_fraction).ceil() as usize).clamp(1, vertices)
    }

    fn c1_units(&self) -> u64 {
        constraint_units(self.c1_us, self.grain)
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("bad list item {v:?}")))
        .collect()
}

/// Decimal milliseconds to 0.001 ms units; `None` if finer than the
/// sub-grain or malformed.
pub fn parse_ms(s: &str) -> Option<u64> {
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if (int_part.is_empty() && frac_part.is_empty()) || frac_part.len() > 3 {
        return None;
    }
    let int: u64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut frac: u64 = 0;
    if !frac_part.is_empty() {
        frac = frac_part.parse().ok()?;
        for _ in frac_part.len()..3 {
            frac *= 10;
        }
    }
    int.checked_mul(SUBGRAIN_PER_MS)?.checked_add(frac)
}

#[derive(Clone, Debug)]
pub struct TimingRecord {
    pub experiment: &'static str,
    pub vertices: usize,
    pub spreading: u64,
    pub seed: u64,
    pub source: String,
    pub c0: u32,
    pub c1_units: u64,
    pub time_ns: u128,
    pub iters: u32,
    pub front_size: usize,
}

impl TimingRecord {
    fn write(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.vertices,
            self.spreading,
            self.seed,
            self.source,
            self.c0,
            self.c1_units,
            self.time_ns,
            self.iters,
            self.front_size
        )
    }
}

/// Warmed-up wall time of the solver alone; graph construction is excluded.
fn timed_run(
    g: &SrGraph,
    source: NodeId,
    c0: u32,
    c1_units: u64,
    warmup_runs: u32,
) -> (Best2copResult, u128) {
    for _ in 0..warmup_runs {
        std::hint::black_box(best2cop(g, source, c0, c1_units));
    }
    let start = Instant::now();
    let run = best2cop(g, source, c0, c1_units);
    let elapsed = start.elapsed().as_nanos();
    (run, elapsed)
}

fn record_point(
    experiment: &'static str,
    g: &SrGraph,
    spreading: u64,
    seed: u64,
    source: NodeId,
    c1_units: u64,
    cfg: &ExperimentConfig,
) -> TimingRecord {
    let (run, time_ns) = timed_run(g, source, cfg.c0, c1_units, cfg.warmup_runs);
    TimingRecord {
        experiment,
        vertices: g.node_count(),
        spreading,
        seed,
        source: g.label(source).to_string(),
        c0: cfg.c0,
        c1_units,
        time_ns,
        iters: run.iterations_run(),
        front_size: run.total_front_size(),
    }
}

/// Random double full-mesh timing grid over (|V|, spreading, seed), timing
/// the solver for a deterministic sample of sources per graph.
pub fn run_fullmesh_suite(
    cfg: &ExperimentConfig,
    out: &mut impl Write,
) -> io::Result<Vec<TimingRecord>> {
    writeln!(out, "{TIMING_HEADER}")?;
    let c1_units = cfg.c1_units();
    let mut records = Vec::new();
    for &v in &cfg.sizes {
        for &s in &cfg.spreadings {
            for i in 0..cfg.seeds_per_point {
                let seed = cfg.base_seed + i;
                let g = generate_random_sr_graph(v, s, seed);
                for src in 0..cfg.sources_for(v) {
                    let rec =
                        record_point("fullmesh", &g, s, seed, NodeId(src as u32), c1_units, cfg);
                    rec.write(out)?;
                    records.push(rec);
                }
            }
        }
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpreadingMode {
    /// Vary the maximum delay weight directly on the SR graph.
    OnSrGraph,
    /// Vary the maximum raw link delay of a sparse stand-in, rebuilding the
    /// SR graph each time.
    PreSpreading,
}

/// Sweeps delay spreading. `cfg.spreadings` carries the sweep values: SR
/// weights for [`SpreadingMode::OnSrGraph`], raw max delays in grain units
/// for [`SpreadingMode::PreSpreading`].
pub fn run_spreading_sweep(
    mode: SpreadingMode,
    cfg: &ExperimentConfig,
    out: &mut impl Write,
) -> io::Result<Vec<TimingRecord>> {
    writeln!(out, "{TIMING_HEADER}")?;
    let c1_units = cfg.c1_units();
    let unit_us = SUBGRAIN_PER_MS / cfg.grain.t() as u64;
    let mut records = Vec::new();
    for &s2 in &cfg.spreadings {
        for i in 0..cfg.seeds_per_point {
            let seed = cfg.base_seed + i;
            let (g, name) = match mode {
                SpreadingMode::OnSrGraph => (
                    generate_random_sr_graph(cfg.vertices, s2, seed),
                    "spreading_sr",
                ),
                SpreadingMode::PreSpreading => {
                    let max_delay_us = (s2 * unit_us).max(1);
                    let raw = generate_isp_standin(cfg.n_nodes, cfg.n_links, max_delay_us, seed);
                    (build_sr_graph(&raw, cfg.grain), "spreading_pre")
                }
            };
            for src in 0..cfg.sources.clamp(1, g.node_count()) {
                let rec = record_point(name, &g, s2, seed, NodeId(src as u32), c1_units, cfg);
                rec.write(out)?;
                records.push(rec);
            }
        }
    }
    Ok(records)
}

/// Times the solver across delay-constraint values on a fixed full-mesh
/// family; gamma shrinks with the constraint.
pub fn run_constraint_sweep(
    cfg: &ExperimentConfig,
    out: &mut impl Write,
) -> io::Result<Vec<TimingRecord>> {
    writeln!(out, "{TIMING_HEADER}")?;
    let spreading = cfg.spreadings.first().copied().unwrap_or(1000);
    let mut records = Vec::new();
    for i in 0..cfg.seeds_per_point {
        let seed = cfg.base_seed + i;
        let g = generate_random_sr_graph(cfg.vertices, spreading, seed);
        for &c1_us in &cfg.c1_values_us {
            let c1_units = constraint_units(c1_us, cfg.grain);
            for src in 0..cfg.sources.clamp(1, g.node_count()) {
                let rec = record_point(
                    "constraint",
                    &g,
                    spreading,
                    seed,
                    NodeId(src as u32),
                    c1_units,
                    cfg,
                );
                rec.write(out)?;
                records.push(rec);
            }
        }
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageRow {
    pub source: String,
    pub dest: String,
    pub c1_units: u64,
    pub iters_needed: Option<u32>,
    pub class: CoverageClass,
}

/// Per-destination coverage classification on a sparse raw stand-in, for a
/// list of constraints and a deterministic sample of sources.
pub fn run_coverage_study(
    cfg: &ExperimentConfig,
    out: &mut impl Write,
) -> io::Result<Vec<CoverageRow>> {
    writeln!(out, "{COVERAGE_HEADER}")?;
    let raw = generate_isp_standin(
        cfg.n_nodes,
        cfg.n_links,
        cfg.max_delay_us.max(1),
        cfg.base_seed,
    );
    let g = build_sr_graph(&raw, cfg.grain);
    let mut rows = Vec::new();
    for src in 0..cfg.sources.clamp(1, g.node_count()) {
        let source = NodeId(src as u32);
        for &c1_us in &cfg.c1_values_us {
            let c1_units = constraint_units(c1_us, cfg.grain);
            let run = best2cop_unbounded(&g, source, c1_units);
            for rec in coverage_from_run(&run, cfg.segmax) {
                let row = CoverageRow {
                    source: g.label(source).to_string(),
                    dest: g.label(rec.dest).to_string(),
                    c1_units,
                    iters_needed: rec.iters_needed,
                    class: rec.class,
                };
                writeln!(
                    out,
                    "coverage,{},{},{},{},{}",
                    row.source,
                    row.dest,
                    row.c1_units,
                    row.iters_needed.map_or(String::new(), |i| i.to_string()),
                    row.class.as_str()
                )?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Median over an unordered sample; picks the upper middle on even lengths.
pub fn median(mut xs: Vec<u128>) -> u128 {
    assert!(!xs.is_empty());
    xs.sort_unstable();
    xs[xs.len() / 2]
}
