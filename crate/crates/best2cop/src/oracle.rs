//! Brute-force reference solver for small SR graphs.
//!
//! Two independent routes certify the solver. [`enumerate_paths`] literally
//! walks every edge sequence up to a length bound (segment lists are walks,
//! not simple paths — revisits are legal). [`oracle_fronts`] runs a complete
//! per-length value iteration with no dominance logic at all: for each walk
//! length it tabulates the minimum cost at every (node, delay) cell, then
//! reads the Pareto views off the final table. Both refuse to run past an
//! extension budget rather than stall.

use thiserror::Error;

use crate::solver::{gamma_units, FrontPoint};
use crate::srgraph::{EdgeIdx, SrGraph};
use crate::topology::NodeId;

/// Default cap on enumerated walk extensions.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle budget of {budget} extensions exceeded")]
    BudgetExceeded { budget: u64 },
}

/// A walk in G' with its metric totals; segment count is the edge count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OraclePath {
    pub edges: Vec<EdgeIdx>,
    pub delay: u64,
    pub cost: u64,
}

impl OraclePath {
    pub fn seg_count(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn dest(&self, g: &SrGraph) -> NodeId {
        g.edge(*self.edges.last().expect("non-empty walk")).dst
    }
}

/// Depth-first enumeration of every walk from `source` of length 1..=max_len
/// with running delay <= delay_cap.
pub fn enumerate_paths(
    g: &SrGraph,
    source: NodeId,
    max_len: u32,
    delay_cap: u64,
    budget: u64,
) -> Result<Vec<OraclePath>, OracleError> {
    let out = g.out_index();
    let mut walks = Vec::new();
    let mut prefix = Vec::new();
    let mut used = 0u64;
    dfs(
        g,
        &out,
        source,
        max_len,
        delay_cap,
        budget,
        &mut used,
        &mut prefix,
        0,
        0,
        &mut walks,
    )?;
    Ok(walks)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &SrGraph,
    out: &[Vec<EdgeIdx>],
    at: NodeId,
    remaining: u32,
    delay_cap: u64,
    budget: u64,
    used: &mut u64,
    prefix: &mut Vec<EdgeIdx>,
    delay: u64,
    cost: u64,
    walks: &mut Vec<OraclePath>,
) -> Result<(), OracleError> {
    if remaining == 0 {
        return Ok(());
    }
    for &ei in &out[at.index()] {
        let e = g.edge(ei);
        let nd = delay + e.delay;
        if nd > delay_cap {
            continue;
        }
        *used += 1;
        if *used > budget {
            return Err(OracleError::BudgetExceeded { budget });
        }
        prefix.push(ei);
        walks.push(OraclePath {
            edges: prefix.clone(),
            delay: nd,
            cost: cost + e.cost,
        });
        dfs(
            g,
            out,
            e.dst,
            remaining - 1,
            delay_cap,
            budget,
            used,
            prefix,
            nd,
            cost + e.cost,
            walks,
        )?;
        prefix.pop();
    }
    Ok(())
}

struct LengthTable {
    /// cell\[v * (gamma+1) + d\] = min cost over walks of the current length.
    cur: Vec<u64>,
    prev: Vec<u64>,
    best: Vec<u64>,
    best_len: Vec<u32>,
}

/// Exact per-destination Pareto fronts over walks of at most c0 edges, in
/// the same shape as the solver's final fronts: delay-indexed minimum cost
/// with the smallest achieving segment count per entry.
pub fn oracle_fronts(
    g: &SrGraph,
    source: NodeId,
    c0: u32,
    c1_units: u64,
    budget: u64,
) -> Result<Vec<Vec<FrontPoint>>, OracleError> {
    let gamma = gamma_units(Some(c0), c1_units, g.max_edge_delay());
    fronts_by_value_iteration(g, source, Some(c0), gamma, budget)
}

/// Unbounded-length variant: iterates until no walk of the next length fits
/// under gamma. Terminates structurally when all edge delays are positive;
/// otherwise the budget guard trips.
pub fn oracle_fronts_unbounded(
    g: &SrGraph,
    source: NodeId,
    c1_units: u64,
    budget: u64,
) -> Result<Vec<Vec<FrontPoint>>, OracleError> {
    fronts_by_value_iteration(g, source, None, c1_units, budget)
}

fn fronts_by_value_iteration(
    g: &SrGraph,
    source: NodeId,
    c0: Option<u32>,
    gamma: u64,
    budget: u64,
) -> Result<Vec<Vec<FrontPoint>>, OracleError> {
    let n = g.node_count();
    let width = gamma as usize + 1;
    let mut t = LengthTable {
        cur: vec![u64::MAX; n * width],
        prev: vec![u64::MAX; n * width],
        best: vec![u64::MAX; n * width],
        best_len: vec![0; n * width],
    };
    t.prev[source.index() * width] = 0;
    t.best[source.index() * width] = 0;

    let mut used = 0u64;
    let mut len = 0u32;
    loop {
        len += 1;
        if let Some(c0) = c0 {
            if len > c0 {
                break;
            }
        }
        let mut any = false;
        for v in 0..n {
            for rec in g.in_records(v) {
                let row = rec.src as usize * width;
                for d in 0..width {
                    let c = t.prev[row + d];
                    if c == u64::MAX {
                        continue;
                    }
                    used += 1;
                    if used > budget {
                        return Err(OracleError::BudgetExceeded { budget });
                    }
                    let nd = d as u64 + rec.w1;
                    if nd > gamma {
                        continue;
                    }
                    let cell = v * width + nd as usize;
                    let nc = c + rec.w2;
                    if nc < t.cur[cell] {
                        t.cur[cell] = nc;
                        any = true;
                    }
                }
            }
        }
        if !any {
            break;
        }
        for cell in 0..n * width {
            let c = t.cur[cell];
            if c < t.best[cell] {
                t.best[cell] = c;
                t.best_len[cell] = len;
            }
            t.prev[cell] = c;
            t.cur[cell] = u64::MAX;
        }
    }

    Ok((0..n)
        .map(|v| {
            let mut view = Vec::new();
            let mut running = u64::MAX;
            for d in 0..width {
                let c = t.best[v * width + d];
                if c < running {
                    running = c;
                    view.push(FrontPoint {
                        delay: d as u64,
                        cost: c,
                        segments: t.best_len[v * width + d],
                    });
                }
            }
            view
        })
        .collect())
}

/// Pareto views straight from an enumerated walk set; the slow cross-check
/// for the value iteration.
pub fn fronts_from_walks(
    g: &SrGraph,
    source: NodeId,
    walks: &[OraclePath],
) -> Vec<Vec<FrontPoint>> {
    let n = g.node_count();
    let mut per_dest: Vec<std::collections::BTreeMap<u64, (u64, u32)>> =
        vec![Default::default(); n];
    per_dest[source.index()].insert(0, (0, 0));
    for w in walks {
        let v = w.dest(g).index();
        let entry = per_dest[v]
            .entry(w.delay)
            .or_insert((w.cost, w.seg_count()));
        if w.cost < entry.0 || (w.cost == entry.0 && w.seg_count() < entry.1) {
            *entry = (w.cost, w.seg_count());
        }
    }
    per_dest
        .into_iter()
        .map(|m| {
            let mut view = Vec::new();
            let mut running = u64::MAX;
            for (delay, (cost, segments)) in m {
                if cost < running {
                    running = cost;
                    view.push(FrontPoint {
                        delay,
                        cost,
                        segments,
                    });
                }
            }
            view
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srgraph::{AccuracyGrain, SegmentKind, SrEdge};

    fn full_mesh_nodes(n: u32, delay: u64, cost: u64) -> SrGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    edges.push(SrEdge {
                        src: NodeId(u),
                        dst: NodeId(v),
                        kind: SegmentKind::Node,
                        delay,
                        cost,
                    });
                }
            }
        }
        SrGraph::from_edges(
            (0..n).map(|i| format!("v{i}")).collect(),
            AccuracyGrain::default(),
            edges,
        )
        .unwrap()
    }

    #[test]
    fn two_node_walks_allow_revisits() {
        let g = full_mesh_nodes(2, 1, 1);
        let walks = enumerate_paths(&g, NodeId(0), 2, 100, 1000).unwrap();
        assert_eq!(walks.len(), 2);
        assert_eq!(walks[0].edges.len(), 1);
        assert_eq!(walks[1].edges.len(), 2);
        assert_eq!(walks[1].dest(&g), NodeId(0));
    }

    #[test]
    fn zero_delay_cap_prunes_everything() {
        let g = full_mesh_nodes(3, 1, 1);
        let walks = enumerate_paths(&g, NodeId(0), 4, 0, 1000).unwrap();
        assert!(walks.is_empty());
    }

    #[test]
    fn walk_count_matches_the_closed_form_on_a_uniform_mesh() {
        // 3-node mesh, length <= 2: 2 one-edge walks plus 2*2 two-edge walks.
        let g = full_mesh_nodes(3, 1, 1);
        let walks = enumerate_paths(&g, NodeId(0), 2, 100, 1000).unwrap();
        let ones = walks.iter().filter(|w| w.edges.len() == 1).count();
        let twos = walks.iter().filter(|w| w.edges.len() == 2).count();
        assert_eq!((ones, twos), (2, 4));
    }

    #[test]
    fn budget_refusal_is_an_error() {
        let g = full_mesh_nodes(6, 1, 1);
        assert!(matches!(
            enumerate_paths(&g, NodeId(0), 8, 1_000, 100),
            Err(OracleError::BudgetExceeded { budget: 100 })
        ));
    }

    #[test]
    fn source_row_is_the_trivial_front() {
        let g = full_mesh_nodes(4, 3, 5);
        let fronts = oracle_fronts(&g, NodeId(1), 3, 100, DEFAULT_BUDGET).unwrap();
        assert_eq!(
            fronts[1],
            vec![FrontPoint {
                delay: 0,
                cost: 0,
                segments: 0
            }]
        );
    }

    #[test]
    fn value_iteration_matches_literal_enumeration() {
        use crate::srgraph::generate_random_sr_graph;
        for seed in 0..25u64 {
            let g = generate_random_sr_graph(5, 12, 700 + seed);
            let c0 = 1 + (seed % 3) as u32;
            let gamma = gamma_units(Some(c0), 40, g.max_edge_delay());
            let walks = enumerate_paths(&g, NodeId(0), c0, gamma, DEFAULT_BUDGET).unwrap();
            let slow = fronts_from_walks(&g, NodeId(0), &walks);
            let fast = oracle_fronts(&g, NodeId(0), c0, 40, DEFAULT_BUDGET).unwrap();
            assert_eq!(slow, fast, "seed {seed} c0 {c0}");
        }
    }

    #[test]
    fn fronts_are_themselves_non_dominated() {
        use crate::srgraph::generate_random_sr_graph;
        let g = generate_random_sr_graph(7, 30, 99);
        let fronts = oracle_fronts(&g, NodeId(0), 4, 80, DEFAULT_BUDGET).unwrap();
        for view in fronts {
            for w in view.windows(2) {
                assert!(w[0].delay < w[1].delay && w[0].cost > w[1].cost);
            }
        }
    }

    #[test]
    fn edge_insertion_order_does_not_matter() {
        use crate::srgraph::generate_random_sr_graph;
        let g = generate_random_sr_graph(6, 20, 31);
        let mut edges: Vec<SrEdge> = g.edges().collect();
        edges.reverse();
        let h = SrGraph::from_edges(g.labels().to_vec(), g.grain(), edges).unwrap();
        assert_eq!(
            oracle_fronts(&g, NodeId(2), 3, 60, DEFAULT_BUDGET).unwrap(),
            oracle_fronts(&h, NodeId(2), 3, 60, DEFAULT_BUDGET).unwrap()
        );
    }
}
