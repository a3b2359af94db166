//! Turning solver output into segment lists.
//!
//! Every recorded improvement is a real path of `iteration` segments, so a
//! query scans the improvement log under its constraints and picks the entry
//! minimizing its objective; predecessor records then rebuild the list. A
//! node segment expands back into the full ECMP best-path set of the raw
//! topology, an adjacency segment into its single link.

use thiserror::Error;

use crate::solver::{Best2copResult, Objective, Query, EDGE_NONE};
use crate::srgraph::{ecmp_best_paths, round_delay, SegmentKind, SrGraph, SrGraphError};
use crate::topology::{NodeId, RawTopology};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Node {
        src: NodeId,
        dst: NodeId,
    },
    Adjacency {
        src: NodeId,
        dst: NodeId,
        interface: u32,
    },
}

impl Segment {
    pub fn src(&self) -> NodeId {
        match *self {
            Segment::Node { src, .. } | Segment::Adjacency { src, .. } => src,
        }
    }

    pub fn dst(&self) -> NodeId {
        match *self {
            Segment::Node { dst, .. } | Segment::Adjacency { dst, .. } => dst,
        }
    }
}

/// An ordered segment stack with its (M0, M1, M2) totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentList {
    pub segments: Vec<Segment>,
    pub delay_units: u64,
    pub cost: u64,
}

impl SegmentList {
    pub fn seg_count(&self) -> u32 {
        self.segments.len() as u32
    }

    pub fn format(&self, g: &SrGraph) -> String {
        let mut out = String::new();
        for s in &self.segments {
            match *s {
                Segment::Node { src, dst } => {
                    out.push_str(&format!("({},{})", g.label(src), g.label(dst)));
                }
                Segment::Adjacency {
                    src,
                    dst,
                    interface,
                } => {
                    out.push_str(&format!(
                        "({}#{},{})",
                        g.label(src),
                        interface,
                        g.label(dst)
                    ));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Solved(SegmentList),
    /// Reachable, but no entry satisfies the constraints.
    Infeasible,
    /// No segment walk reaches the destination at all.
    Unreachable,
}

impl SolveOutcome {
    pub fn solved(self) -> Option<SegmentList> {
        match self {
            SolveOutcome::Solved(sl) => Some(sl),
            _ => None,
        }
    }
}

/// Scans F\[dest\]\[i <= c0\] under the query's constraints and reconstructs
/// the optimal segment list. Ties break deterministically: MinCost by
/// (cost, delay, segments), MinDelay by (delay, cost, segments), MinSegments
/// by (segments, cost, delay).
pub fn extract_solution(
    run: &Best2copResult,
    g: &SrGraph,
    dest: NodeId,
    q: &Query,
) -> SolveOutcome {
    extract_solution_with(run, g, dest, q, None)
}

/// Like [`extract_solution`], with a precomputed reachability row (from
/// [`SrGraph::reachable_from`]) to amortize the unreachable/infeasible
/// distinction over many destinations.
pub fn extract_solution_with(
    run: &Best2copResult,
    g: &SrGraph,
    dest: NodeId,
    q: &Query,
    reachable: Option<&[bool]>,
) -> SolveOutcome {
    assert_eq!(run.source(), q.source, "run does not cover this query");
    if let Some(c0_run) = run.segment_budget() {
        assert!(
            q.c0 <= c0_run || run.quiesced(),
            "query budget exceeds what the run explored"
        );
    }
    let upto = q.c0.min(run.iterations_run());
    let c1 = q.c1_units.min(run.c1_units());
    let c2 = q.c2.unwrap_or(u64::MAX);

    let nd = run.deltas(dest);
    let mut best: Option<((u64, u64, u64), usize)> = None;
    for iter in 0..=upto {
        let i = iter as usize;
        let range = nd.iter_start[i] as usize..nd.iter_start[i + 1] as usize;
        for idx in range {
            let e = &nd.entries[idx];
            if e.delay as u64 > c1 || e.cost > c2 {
                continue;
            }
            let key = match q.objective {
                Objective::MinCost => (e.cost, e.delay as u64, iter as u64),
                Objective::MinDelay => (e.delay as u64, e.cost, iter as u64),
                Objective::MinSegments => (iter as u64, e.cost, e.delay as u64),
            };
            if best.is_none_or(|(bk, _)| key < bk) {
                best = Some((key, idx));
            }
        }
    }

    let Some((_, idx)) = best else {
        let is_reachable = match reachable {
            Some(r) => r[dest.index()],
            None => g.reachable_from(q.source)[dest.index()],
        };
        return if is_reachable {
            SolveOutcome::Infeasible
        } else {
            SolveOutcome::Unreachable
        };
    };
    SolveOutcome::Solved(rebuild(run, g, dest, idx))
}

/// Follows predecessor records back to the source. Each hop looks up the
/// exact entry the extension consumed: the frontier entry written one
/// iteration earlier at the recorded delay.
fn rebuild(run: &Best2copResult, g: &SrGraph, dest: NodeId, idx: usize) -> SegmentList {
    let mut segments = Vec::new();
    let mut node = dest;
    let mut nd = run.deltas(node);
    let mut entry = nd.entries[idx];
    let mut iter = nd.iter_of(idx);
    let (delay, cost) = (entry.delay as u64, entry.cost);
    while entry.pred_edge != EDGE_NONE {
        let e = g.edge(entry.pred_edge);
        debug_assert_eq!(e.dst, node);
        segments.push(match e.kind {
            SegmentKind::Node => Segment::Node {
                src: e.src,
                dst: e.dst,
            },
            SegmentKind::Adjacency { interface } => Segment::Adjacency {
                src: e.src,
                dst: e.dst,
                interface,
            },
        });
        node = e.src;
        iter -= 1;
        nd = run.deltas(node);
        let range =
            nd.iter_start[iter as usize] as usize..nd.iter_start[iter as usize + 1] as usize;
        let slice = &nd.entries[range.clone()];
        let pos = slice
            .binary_search_by_key(&entry.pred_delay, |d| d.delay)
            .expect("predecessor entry present in its iteration");
        entry = slice[pos];
    }
    debug_assert_eq!(node, run.source());
    debug_assert_eq!(iter, 0);
    segments.reverse();
    SegmentList {
        segments,
        delay_units: delay,
        cost,
    }
}

/// One physical path a packet may take under a segment list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhysicalPath {
    /// Indices into the raw topology's link list.
    pub links: Vec<usize>,
    pub delay_us: u64,
    /// Sum of per-link quantized delays.
    pub delay_units: u64,
    pub cost: u64,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("segment list is stale against this SR graph: {0}")]
    StaleSegment(String),
    #[error("ECMP expansion exceeds the budget of {0} paths")]
    BudgetExceeded(u64),
}

/// Expands a segment list into the set of physical paths it load-balances
/// over: each node segment becomes its ECMP best-path set, each adjacency
/// segment its single raw link. `budget` caps the product size.
pub fn decode_segment_list(
    sl: &SegmentList,
    topo: &RawTopology,
    g: &SrGraph,
    budget: u64,
) -> Result<Vec<PhysicalPath>, DecodeError> {
    let grain = g.grain();
    let mut per_segment: Vec<Vec<Vec<usize>>> = Vec::with_capacity(sl.segments.len());
    for seg in &sl.segments {
        let (u, v) = (seg.src(), seg.dst());
        let edges = g.edges_between(u, v);
        match *seg {
            Segment::Node { .. } => {
                if !edges.iter().any(|e| e.kind == SegmentKind::Node) {
                    return Err(DecodeError::StaleSegment(format!(
                        "no node segment {}->{}",
                        g.label(u),
                        g.label(v)
                    )));
                }
                let paths = ecmp_best_paths(topo, u, v, budget).map_err(|e| match e {
                    SrGraphError::BudgetExceeded { budget } => DecodeError::BudgetExceeded(budget),
                    other => DecodeError::StaleSegment(other.to_string()),
                })?;
                if paths.is_empty() {
                    return Err(DecodeError::StaleSegment(format!(
                        "{} unreachable from {} in the raw topology",
                        g.label(v),
                        g.label(u)
                    )));
                }
                per_segment.push(paths);
            }
            Segment::Adjacency { interface, .. } => {
                if !edges
                    .iter()
                    .any(|e| e.kind == SegmentKind::Adjacency { interface })
                {
                    return Err(DecodeError::StaleSegment(format!(
                        "no adjacency segment {}#{}->{}",
                        g.label(u),
                        interface,
                        g.label(v)
                    )));
                }
                let li = topo
                    .links()
                    .iter()
                    .position(|l| l.src == u && l.dst == v && l.interface == interface)
                    .ok_or_else(|| {
                        DecodeError::StaleSegment(format!(
                            "raw link {}#{}->{} missing",
                            g.label(u),
                            interface,
                            g.label(v)
                        ))
                    })?;
                per_segment.push(vec![vec![li]]);
            }
        }
    }

    let mut paths: Vec<Vec<usize>> = vec![Vec::new()];
    for options in &per_segment {
        let grown = paths.len() as u64 * options.len() as u64;
        if grown > budget {
            return Err(DecodeError::BudgetExceeded(budget));
        }
        let mut next = Vec::with_capacity(grown as usize);
        for p in &paths {
            for opt in options {
                let mut np = p.clone();
                np.extend_from_slice(opt);
                next.push(np);
            }
        }
        paths = next;
    }

    Ok(paths
        .into_iter()
        .map(|links| {
            let mut delay_us = 0;
            let mut delay_units = 0;
            let mut cost = 0;
            for &li in &links {
                let l = &topo.links()[li];
                delay_us += l.delay_us;
                delay_units += round_delay(l.delay_us, grain);
                cost += l.igp_cost as u64;
            }
            PhysicalPath {
                links,
                delay_us,
                delay_units,
                cost,
            }
        })
        .collect())
}
