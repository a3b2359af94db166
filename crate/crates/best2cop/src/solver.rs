//! Segment-by-segment exact exploration of the SR graph.
//!
//! The solver keeps, per destination, a delay-indexed array of the best known
//! IGP cost (the cumulative front) plus the frontier of entries improved
//! during the last iteration. Each iteration extends only frontier entries by
//! one segment, in a not-in-place Bellman-Ford fashion, then filters the
//! candidates in two stages: an index-local rejection during extension and a
//! full increasing-delay sweep that establishes non-domination. Iteration i
//! therefore settles every non-dominated distance encodable in exactly i
//! segments, and the run stops at the segment budget or as soon as an
//! iteration changes nothing.
//!
//! Distances are bounded by gamma = min(c1, c0 * max_edge_delay): anything
//! farther either violates the delay constraint or cannot be reached within
//! the budget, so the arrays stay small and candidate pruning is free.

use rayon::prelude::*;

use crate::srgraph::{EdgeIdx, EdgeRec, SrGraph};
use crate::topology::NodeId;

/// Bound on distinct feasible quantized delays for a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaBound(pub u64);

/// gamma = min(c1, c0 * max edge delay), all in delay units. An unbounded
/// segment budget leaves only the delay constraint.
pub fn gamma_units(c0: Option<u32>, c1_units: u64, max_edge_delay: u64) -> u64 {
    let budget_cap = match c0 {
        Some(c) => (c as u64).saturating_mul(max_edge_delay),
        None => u64::MAX,
    };
    c1_units.min(budget_cap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// M0: fewest segments.
    MinSegments,
    /// M1: smallest delay.
    MinDelay,
    /// M2: smallest IGP cost.
    MinCost,
}

/// A 2COP query: segment budget c0, delay constraint c1 (in units), optional
/// cost constraint c2, and the metric to optimize.
#[derive(Clone, Copy, Debug)]
pub struct Query {
    pub source: NodeId,
    pub c0: u32,
    pub c1_units: u64,
    pub c2: Option<u64>,
    pub objective: Objective,
}

impl Query {
    pub fn new(source: NodeId, c1_units: u64) -> Self {
        Query {
            source,
            c0: 10,
            c1_units,
            c2: None,
            objective: Objective::MinCost,
        }
    }
}

pub fn compute_gamma(q: &Query, g: &SrGraph) -> GammaBound {
    GammaBound(gamma_units(Some(q.c0), q.c1_units, g.max_edge_delay()))
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Segment budget; `None` runs until quiescence.
    pub c0: Option<u32>,
    pub c1_units: u64,
    /// Intra-run parallelism across destinations; results are identical for
    /// any worker count.
    pub workers: usize,
}

pub(crate) const EDGE_NONE: EdgeIdx = EdgeIdx::MAX;

/// One improvement to a destination's front: the entry now sitting at
/// `delay`, plus the predecessor information to rebuild its segment list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct DeltaEntry {
    pub delay: u32,
    pub cost: u64,
    pub pred_edge: EdgeIdx,
    pub pred_delay: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct NodeDeltas {
    pub entries: Vec<DeltaEntry>,
    /// Offsets into `entries` per iteration; iteration i wrote
    /// `entries[iter_start[i]..iter_start[i+1]]`, in increasing delay order.
    pub iter_start: Vec<u32>,
}

impl NodeDeltas {
    pub(crate) fn iter_of(&self, idx: usize) -> u32 {
        (self.iter_start.partition_point(|&s| s as usize <= idx) - 1) as u32
    }

    fn range(&self, iter: u32) -> std::ops::Range<usize> {
        let i = iter as usize;
        self.iter_start[i] as usize..self.iter_start[i + 1] as usize
    }
}

/// A point of a Pareto front view: best cost at this exact delay, reachable
/// in `segments` segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrontPoint {
    pub delay: u64,
    pub cost: u64,
    pub segments: u32,
}

/// Full output of a run: per-destination improvement logs from which every
/// per-iteration snapshot F\[v\]\[i\] can be replayed.
#[derive(Clone, Debug)]
pub struct Best2copResult {
    source: NodeId,
    gamma: u64,
    c1_units: u64,
    c0: Option<u32>,
    iterations_run: u32,
    quiesced: bool,
    nodes: Vec<NodeDeltas>,
}

impl Best2copResult {
    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn c1_units(&self) -> u64 {
        self.c1_units
    }

    pub fn segment_budget(&self) -> Option<u32> {
        self.c0
    }

    pub fn iterations_run(&self) -> u32 {
        self.iterations_run
    }

    /// True when the run stopped because an iteration changed no front, so
    /// every later snapshot would be identical.
    pub fn quiesced(&self) -> bool {
        self.quiesced
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn deltas(&self, dest: NodeId) -> &NodeDeltas {
        &self.nodes[dest.index()]
    }

    /// Delay-indexed array content of F\[dest\]\[upto\]: best cost per exact
    /// delay (possibly dominated by a smaller delay), with the iteration that
    /// wrote it. Ordered by delay.
    pub fn entries_at(&self, dest: NodeId, upto: u32) -> Vec<FrontPoint> {
        let nd = self.deltas(dest);
        let upto = upto.min(self.iterations_run);
        let mut map = std::collections::BTreeMap::new();
        for i in 0..=upto {
            for e in &nd.entries[nd.range(i)] {
                map.insert(e.delay, (e.cost, i));
            }
        }
        map.into_iter()
            .map(|(delay, (cost, segments))| FrontPoint {
                delay: delay as u64,
                cost,
                segments,
            })
            .collect()
    }

    /// Non-dominated view of F\[dest\]\[upto\]: strictly increasing delay,
    /// strictly decreasing cost.
    pub fn front_view(&self, dest: NodeId, upto: u32) -> Vec<FrontPoint> {
        let mut out = Vec::new();
        let mut running = u64::MAX;
        for p in self.entries_at(dest, upto) {
            if p.cost < running {
                running = p.cost;
                out.push(p);
            }
        }
        out
    }

    pub fn final_front(&self, dest: NodeId) -> Vec<FrontPoint> {
        self.front_view(dest, self.iterations_run)
    }

    /// Number of entries newly settled per iteration (diagnostic).
    pub fn frontier_sizes(&self, dest: NodeId) -> Vec<usize> {
        let nd = self.deltas(dest);
        nd.iter_start
            .windows(2)
            .map(|w| (w[1] - w[0]) as usize)
            .collect()
    }

    /// Last iteration that changed this destination's front, if any entry
    /// exists at all. This is also the smallest i with F\[dest\]\[i\] equal
    /// to the final front, since every kept entry alters the view.
    pub fn last_change_iteration(&self, dest: NodeId) -> Option<u32> {
        let nd = self.deltas(dest);
        if nd.entries.is_empty() {
            return None;
        }
        Some(nd.iter_of(nd.entries.len() - 1))
    }

    /// All improvements for a destination as (iteration, delay, cost) rows.
    pub fn delta_rows(&self, dest: NodeId) -> Vec<(u32, u64, u64)> {
        let nd = self.deltas(dest);
        (0..nd.entries.len())
            .map(|i| {
                let e = &nd.entries[i];
                (nd.iter_of(i), e.delay as u64, e.cost)
            })
            .collect()
    }

    /// Aggregate size of all final front views.
    pub fn total_front_size(&self) -> usize {
        (0..self.nodes.len())
            .map(|v| self.final_front(NodeId(v as u32)).len())
            .sum()
    }
}

/// New frontier entries and their improvement records for one destination.
type IterationResult = (Vec<(u32, u64)>, Vec<DeltaEntry>);

struct Scratch {
    cand_cost: Vec<u64>,
    cand_pred: Vec<(EdgeIdx, u32)>,
}

impl Scratch {
    fn new(gamma: u64) -> Self {
        Scratch {
            cand_cost: vec![u64::MAX; gamma as usize + 1],
            cand_pred: vec![(EDGE_NONE, 0); gamma as usize + 1],
        }
    }
}

/// Extends every frontier entry of each in-neighbor by the corresponding
/// edges, dropping candidates past gamma and candidates already beaten at
/// their own delay index. Returns whether anything was written.
fn extend_into(
    recs: &[EdgeRec],
    in_base: u32,
    pfcur: &[Vec<(u32, u64)>],
    dist_v: &[u64],
    gamma: u64,
    scratch: &mut Scratch,
) -> bool {
    let mut any = false;
    for (off, rec) in recs.iter().enumerate() {
        let pf = &pfcur[rec.src as usize];
        if pf.is_empty() {
            continue;
        }
        let (w1, w2) = (rec.w1, rec.w2);
        for &(d, c) in pf {
            let nd = d as u64 + w1;
            if nd > gamma {
                break; // frontier is sorted by delay
            }
            let nc = c + w2;
            let ndi = nd as usize;
            if nc < dist_v[ndi] && nc < scratch.cand_cost[ndi] {
                scratch.cand_cost[ndi] = nc;
                scratch.cand_pred[ndi] = (in_base + off as u32, d);
                any = true;
            }
        }
    }
    any
}

/// Increasing-delay sweep carrying the running minimum cost over both the
/// cumulative front and the candidates accepted so far: a candidate survives
/// only if it strictly improves on every weakly-smaller delay. Survivors
/// update the cumulative array and become the next frontier. Resets the
/// scratch as it goes.
fn filter_sweep(dist_v: &mut [u64], scratch: &mut Scratch) -> IterationResult {
    let mut kept = Vec::new();
    let mut deltas = Vec::new();
    let mut running = u64::MAX;
    let Scratch {
        cand_cost,
        cand_pred,
    } = scratch;
    for (d, (stored, cc)) in dist_v.iter_mut().zip(cand_cost.iter_mut()).enumerate() {
        if *stored < running {
            running = *stored;
        }
        let c = *cc;
        if c != u64::MAX {
            *cc = u64::MAX;
            if c < running {
                running = c;
                *stored = c;
                let (pred_edge, pred_delay) = cand_pred[d];
                kept.push((d as u32, c));
                deltas.push(DeltaEntry {
                    delay: d as u32,
                    cost: c,
                    pred_edge,
                    pred_delay,
                });
            }
        }
    }
    (kept, deltas)
}

fn process_dest(
    v: usize,
    g: &SrGraph,
    pfcur: &[Vec<(u32, u64)>],
    dist_v: &mut [u64],
    gamma: u64,
    scratch: &mut Scratch,
) -> IterationResult {
    let recs = g.in_records(v);
    let in_base = g.in_range(v).start;
    if !extend_into(recs, in_base, pfcur, dist_v, gamma, scratch) {
        return (Vec::new(), Vec::new());
    }
    filter_sweep(dist_v, scratch)
}

/// Runs the exploration from `source` under `opts`. For every destination v
/// and iteration i, the recoverable snapshot F\[v\]\[i\] is the exact Pareto
/// front over all SR paths of at most i segments with delay at most gamma.
pub fn best2cop_with(g: &SrGraph, source: NodeId, opts: &SolveOptions) -> Best2copResult {
    let gamma = gamma_units(opts.c0, opts.c1_units, g.max_edge_delay());
    assert!(
        gamma < u32::MAX as u64,
        "delay bound {gamma} exceeds the supported range"
    );
    let n = g.node_count();
    assert!(source.index() < n, "source out of range");

    let mut dist: Vec<Vec<u64>> = vec![vec![u64::MAX; gamma as usize + 1]; n];
    let mut nodes: Vec<NodeDeltas> = vec![
        NodeDeltas {
            entries: Vec::new(),
            iter_start: vec![0],
        };
        n
    ];
    let mut pfcur: Vec<Vec<(u32, u64)>> = vec![Vec::new(); n];

    dist[source.index()][0] = 0;
    nodes[source.index()].entries.push(DeltaEntry {
        delay: 0,
        cost: 0,
        pred_edge: EDGE_NONE,
        pred_delay: 0,
    });
    for (v, nd) in nodes.iter_mut().enumerate() {
        nd.iter_start.push(if v == source.index() { 1 } else { 0 });
    }
    pfcur[source.index()].push((0, 0));

    let pool = (opts.workers > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .expect("worker pool")
    });

    let mut iterations_run = 0;
    let mut quiesced = false;
    let mut iter = 0u32;
    loop {
        iter += 1;
        if let Some(c0) = opts.c0 {
            if iter > c0 {
                break;
            }
        }
        let results: Vec<IterationResult> = match &pool {
            Some(pool) => pool.install(|| {
                let pf = &pfcur;
                dist.par_iter_mut()
                    .enumerate()
                    .map_init(
                        || Scratch::new(gamma),
                        |scratch, (v, row)| process_dest(v, g, pf, row, gamma, scratch),
                    )
                    .collect()
            }),
            None => {
                let mut scratch = Scratch::new(gamma);
                let pf = &pfcur;
                dist.iter_mut()
                    .enumerate()
                    .map(|(v, row)| process_dest(v, g, pf, row, gamma, &mut scratch))
                    .collect()
            }
        };
        iterations_run = iter;
        let mut changed = false;
        for (v, (kept, deltas)) in results.into_iter().enumerate() {
            changed |= !kept.is_empty();
            pfcur[v] = kept;
            let nd = &mut nodes[v];
            nd.entries.extend(deltas);
            nd.iter_start.push(nd.entries.len() as u32);
        }
        if !changed {
            quiesced = true;
            break;
        }
    }

    Best2copResult {
        source,
        gamma,
        c1_units: opts.c1_units,
        c0: opts.c0,
        iterations_run,
        quiesced,
        nodes,
    }
}

/// Bounded single-threaded run, the measured configuration.
pub fn best2cop(g: &SrGraph, source: NodeId, c0: u32, c1_units: u64) -> Best2copResult {
    best2cop_with(
        g,
        source,
        &SolveOptions {
            c0: Some(c0),
            c1_units,
            workers: 1,
        },
    )
}

/// Unbounded run: iterates until no front changes (gamma still bounds delay).
pub fn best2cop_unbounded(g: &SrGraph, source: NodeId, c1_units: u64) -> Best2copResult {
    best2cop_with(
        g,
        source,
        &SolveOptions {
            c0: None,
            c1_units,
            workers: 1,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverageClass {
    /// The budget-bounded optimum matches the unbounded one.
    Perfect,
    /// Both exist but the budget forces a worse cost.
    Imperfect,
    /// Only the unbounded run finds a feasible distance.
    HiddenBySegmax,
    /// No feasible distance even without a budget.
    Infeasible,
}

impl CoverageClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CoverageClass::Perfect => "Perfect",
            CoverageClass::Imperfect => "Imperfect",
            CoverageClass::HiddenBySegmax => "HiddenBySegmax",
            CoverageClass::Infeasible => "Infeasible",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverageRecord {
    pub dest: NodeId,
    /// Smallest iteration count after which the front never changes; absent
    /// when nothing is feasible at all.
    pub iters_needed: Option<u32>,
    pub class: CoverageClass,
}

/// Compares the budget-bounded optimum against the unbounded one per
/// destination. A single unbounded run suffices: snapshots at iterations
/// up to `segmax` coincide with what a bounded run would settle.
pub fn coverage_analysis(
    g: &SrGraph,
    source: NodeId,
    c1_units: u64,
    segmax: u32,
    workers: usize,
) -> Vec<CoverageRecord> {
    let run = best2cop_with(
        g,
        source,
        &SolveOptions {
            c0: None,
            c1_units,
            workers,
        },
    );
    coverage_from_run(&run, segmax)
}

pub fn coverage_from_run(run: &Best2copResult, segmax: u32) -> Vec<CoverageRecord> {
    assert!(run.segment_budget().is_none() || run.quiesced());
    (0..run.node_count() as u32)
        .map(|v| {
            let dest = NodeId(v);
            let bounded = run.front_view(dest, segmax).iter().map(|p| p.cost).min();
            let unbounded = run.final_front(dest).iter().map(|p| p.cost).min();
            let class = match (bounded, unbounded) {
                (None, None) => CoverageClass::Infeasible,
                (None, Some(_)) => CoverageClass::HiddenBySegmax,
                (Some(b), Some(u)) if b == u => CoverageClass::Perfect,
                (Some(_), Some(_)) => CoverageClass::Imperfect,
                (Some(_), None) => unreachable!("bounded front is a subset"),
            };
            CoverageRecord {
                dest,
                iters_needed: if unbounded.is_some() {
                    run.last_change_iteration(dest)
                } else {
                    None
                },
                class,
            }
        })
        .collect()
}
