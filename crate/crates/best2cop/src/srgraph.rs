//! Segment Routing graph construction.
//!
//! The SR graph G' shares its vertex set with the raw topology. Its edges are
//! segments: one node segment per reachable ordered pair (weights: worst
//! quantized delay over the ECMP best-path set, best IGP distance), plus the
//! raw links that survive dominance filtering as adjacency segments.
//!
//! Delays are quantized per link with a ceiling at the accuracy grain and
//! summed afterwards, so a quantized distance never understates the true
//! delay and all downstream arithmetic is integer-exact.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::topology::{NodeId, RawTopology, MAX_IGP_COST, SUBGRAIN_PER_MS};

/// Inverse of the delay grain, in 1/ms. The default of 10 distinguishes
/// delays at 0.1 ms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccuracyGrain(u32);

impl AccuracyGrain {
    pub fn new(t: u32) -> Result<Self, SrGraphError> {
        if t == 0 {
            return Err(SrGraphError::Invalid("accuracy grain must be >= 1".into()));
        }
        Ok(AccuracyGrain(t))
    }

    pub fn t(self) -> u32 {
        self.0
    }
}

impl Default for AccuracyGrain {
    fn default() -> Self {
        AccuracyGrain(10)
    }
}

/// Ceiling quantization of a sub-grain delay into grain units, computed on
/// integers: 2.15 ms at t=10 rounds up to 22 units.
pub fn round_delay(delay_us: u64, grain: AccuracyGrain) -> u64 {
    let t = grain.t() as u64;
    delay_us
        .checked_mul(t)
        .expect("delay quantization overflow")
        .div_ceil(SUBGRAIN_PER_MS)
}

/// Converts a delay constraint to grain units, truncating: a quantized
/// distance within the truncated bound never exceeds the true constraint.
pub fn constraint_units(delay_us: u64, grain: AccuracyGrain) -> u64 {
    delay_us
        .checked_mul(grain.t() as u64)
        .expect("constraint conversion overflow")
        / SUBGRAIN_PER_MS
}

#[derive(Debug, Error)]
pub enum SrGraphError {
    #[error("invalid SR graph: {0}")]
    Invalid(String),
    #[error("enumeration budget of {budget} extensions exceeded")]
    BudgetExceeded { budget: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Node,
    Adjacency { interface: u32 },
}

/// An edge of G': one segment, weighted by (delay units, IGP cost).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SrEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: SegmentKind,
    pub delay: u64,
    pub cost: u64,
}

/// Internal record; destination is implicit in the CSR bucket. `kind_key` is
/// 0 for the node segment and interface+1 for adjacencies, which makes the
/// (src, node-first, interface) scan order a plain sort.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EdgeRec {
    pub src: u32,
    pub kind_key: u32,
    pub w1: u64,
    pub w2: u64,
}

impl EdgeRec {
    pub(crate) fn kind(&self) -> SegmentKind {
        if self.kind_key == 0 {
            SegmentKind::Node
        } else {
            SegmentKind::Adjacency {
                interface: self.kind_key - 1,
            }
        }
    }
}

/// Index of an edge within an [`SrGraph`], stable for a given graph.
pub type EdgeIdx = u32;

#[derive(Clone, Debug)]
pub struct SrGraph {
    labels: Vec<String>,
    grain: AccuracyGrain,
    /// Edges sorted by (dst, src, kind_key); `in_start[v]..in_start[v+1]`
    /// covers the in-edges of v.
    edges: Vec<EdgeRec>,
    in_start: Vec<u32>,
    max_edge_delay: u64,
}

impl SrGraph {
    /// Builds a graph from explicit segment edges. Rejects self-edges and
    /// duplicate segments per ordered pair.
    pub fn from_edges(
        labels: Vec<String>,
        grain: AccuracyGrain,
        mut list: Vec<SrEdge>,
    ) -> Result<Self, SrGraphError> {
        let n = labels.len();
        for e in &list {
            if e.src == e.dst {
                return Err(SrGraphError::Invalid(format!(
                    "self edge at node {}",
                    e.src.0
                )));
            }
            if e.src.index() >= n || e.dst.index() >= n {
                return Err(SrGraphError::Invalid("edge endpoint out of range".into()));
            }
        }
        let key = |e: &SrEdge| {
            let k = match e.kind {
                SegmentKind::Node => 0,
                SegmentKind::Adjacency { interface } => interface + 1,
            };
            (e.dst.0, e.src.0, k)
        };
        list.sort_by_key(key);
        for w in list.windows(2) {
            if key(&w[0]) == key(&w[1]) {
                return Err(SrGraphError::Invalid(format!(
                    "duplicate segment {:?} -> {:?}",
                    w[0].src, w[0].dst
                )));
            }
        }
        let mut edges = Vec::with_capacity(list.len());
        let mut in_start = vec![0u32; n + 1];
        for e in &list {
            in_start[e.dst.index() + 1] += 1;
        }
        for v in 0..n {
            in_start[v + 1] += in_start[v];
        }
        let mut max_edge_delay = 0;
        for e in &list {
            max_edge_delay = max_edge_delay.max(e.delay);
            edges.push(EdgeRec {
                src: e.src.0,
                kind_key: match e.kind {
                    SegmentKind::Node => 0,
                    SegmentKind::Adjacency { interface } => interface + 1,
                },
                w1: e.delay,
                w2: e.cost,
            });
        }
        Ok(SrGraph {
            labels,
            grain,
            edges,
            in_start,
            max_edge_delay,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn grain(&self) -> AccuracyGrain {
        self.grain
    }

    /// Maximum w1 over E': no single segment adds more delay than this.
    pub fn max_edge_delay(&self) -> u64 {
        self.max_edge_delay
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| NodeId(i as u32))
    }

    pub(crate) fn in_records(&self, v: usize) -> &[EdgeRec] {
        &self.edges[self.in_start[v] as usize..self.in_start[v + 1] as usize]
    }

    pub(crate) fn in_range(&self, v: usize) -> std::ops::Range<u32> {
        self.in_start[v]..self.in_start[v + 1]
    }

    pub fn edge(&self, idx: EdgeIdx) -> SrEdge {
        let rec = &self.edges[idx as usize];
        // Largest v with in_start[v] <= idx; empty buckets collapse onto the
        // same offset and are skipped naturally.
        let dst = self.in_start.partition_point(|&s| s <= idx) - 1;
        SrEdge {
            src: NodeId(rec.src),
            dst: NodeId(dst as u32),
            kind: rec.kind(),
            delay: rec.w1,
            cost: rec.w2,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = SrEdge> + '_ {
        (0..self.edges.len() as u32).map(|i| self.edge(i))
    }

    /// E'(u, v): all segments from u to v, node segment first.
    pub fn edges_between(&self, u: NodeId, v: NodeId) -> Vec<SrEdge> {
        self.in_records(v.index())
            .iter()
            .filter(|r| r.src == u.0)
            .map(|r| SrEdge {
                src: u,
                dst: v,
                kind: r.kind(),
                delay: r.w1,
                cost: r.w2,
            })
            .collect()
    }

    /// Out-adjacency as edge indices, for traversals that walk forward.
    pub fn out_index(&self) -> Vec<Vec<EdgeIdx>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for v in 0..self.node_count() {
            for (off, rec) in self.in_records(v).iter().enumerate() {
                out[rec.src as usize].push(self.in_start[v] + off as u32);
            }
        }
        out
    }

    /// Nodes reachable from `source` by walking segments.
    pub fn reachable_from(&self, source: NodeId) -> Vec<bool> {
        let out = self.out_index();
        let mut seen = vec![false; self.node_count()];
        seen[source.index()] = true;
        let mut stack = vec![source.index()];
        while let Some(u) = stack.pop() {
            for &e in &out[u] {
                let v = self.edge(e).dst.index();
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Text dump, one `<u> <v> <N|A:iface> <w1> <w2>` line per edge, sorted
    /// by (src, dst).
    pub fn dump(&self, mut w: impl Write) -> io::Result<()> {
        let mut all: Vec<SrEdge> = self.edges().collect();
        all.sort_by_key(|e| {
            (
                e.src.0,
                e.dst.0,
                match e.kind {
                    SegmentKind::Node => 0,
                    SegmentKind::Adjacency { interface } => interface + 1,
                },
            )
        });
        for e in all {
            let kind = match e.kind {
                SegmentKind::Node => "N".to_string(),
                SegmentKind::Adjacency { interface } => format!("A:{interface}"),
            };
            writeln!(
                w,
                "{} {} {} {} {}",
                self.label(e.src),
                self.label(e.dst),
                kind,
                e.delay,
                e.cost
            )?;
        }
        Ok(())
    }
}

/// Per ordered pair: best IGP distance and the worst quantized delay over
/// the ECMP best-path set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairMetrics {
    pub best_cost: u64,
    pub max_delay: u64,
}

pub struct ApspEcmp {
    n: usize,
    cells: Vec<Option<PairMetrics>>,
}

impl ApspEcmp {
    pub fn get(&self, u: NodeId, v: NodeId) -> Option<PairMetrics> {
        self.cells[u.index() * self.n + v.index()]
    }
}

struct SourceRun {
    dist: Vec<u64>,
    max_delay: Vec<u64>,
}

/// Single-source shortest paths by IGP cost, then worst-delay propagation
/// over the ECMP DAG in increasing-distance order.
fn single_source(
    topo: &RawTopology,
    quantized: &[u64],
    out_links: &[Vec<usize>],
    src: usize,
) -> SourceRun {
    let n = topo.node_count();
    let links = topo.links();
    let mut dist = vec![u64::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    dist[src] = 0;
    heap.push(Reverse((0, src)));
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        order.push(u);
        for &li in &out_links[u] {
            let l = &links[li];
            let nd = d + l.igp_cost as u64;
            let v = l.dst.index();
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    // Edges with dist[u] + w2 == dist[v] form the ECMP DAG; costs are
    // positive, so increasing dist is a topological order.
    let mut max_delay = vec![0u64; n];
    for &u in &order {
        for &li in &out_links[u] {
            let l = &links[li];
            let v = l.dst.index();
            if dist[v] != u64::MAX && dist[u] + l.igp_cost as u64 == dist[v] {
                max_delay[v] = max_delay[v].max(max_delay[u] + quantized[li]);
            }
        }
    }
    SourceRun { dist, max_delay }
}

fn out_link_index(topo: &RawTopology) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); topo.node_count()];
    for (i, l) in topo.links().iter().enumerate() {
        out[l.src.index()].push(i);
    }
    out
}

/// All-pairs (best cost, worst ECMP delay) records. Unreachable pairs are
/// absent. Sources are processed independently, so the result does not
/// depend on scheduling.
pub fn apsp_ecmp(topo: &RawTopology, grain: AccuracyGrain) -> ApspEcmp {
    let n = topo.node_count();
    let quantized: Vec<u64> = topo
        .links()
        .iter()
        .map(|l| round_delay(l.delay_us, grain))
        .collect();
    let out_links = out_link_index(topo);
    let rows: Vec<SourceRun> = (0..n)
        .into_par_iter()
        .map(|src| single_source(topo, &quantized, &out_links, src))
        .collect();
    let mut cells = vec![None; n * n];
    for (u, run) in rows.iter().enumerate() {
        for v in 0..n {
            if u != v && run.dist[v] != u64::MAX {
                cells[u * n + v] = Some(PairMetrics {
                    best_cost: run.dist[v],
                    max_delay: run.max_delay[v],
                });
            }
        }
    }
    ApspEcmp { n, cells }
}

/// Transforms a raw topology into its SR graph: one node segment per
/// reachable ordered pair, plus every raw link not weakly dominated within
/// E'(u,v). Among adjacency candidates tied on both weights, the lowest
/// interface id survives.
pub fn build_sr_graph(topo: &RawTopology, grain: AccuracyGrain) -> SrGraph {
    let n = topo.node_count();
    let apsp = apsp_ecmp(topo, grain);
    let mut edges = Vec::new();

    // Raw links grouped per ordered pair for the dominance pass.
    let mut per_pair: Vec<Vec<(u64, u64, u32)>> = vec![Vec::new(); n * n];
    for l in topo.links() {
        per_pair[l.src.index() * n + l.dst.index()].push((
            round_delay(l.delay_us, grain),
            l.igp_cost as u64,
            l.interface,
        ));
    }

    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let node_seg = apsp.get(NodeId(u as u32), NodeId(v as u32));
            if let Some(m) = node_seg {
                edges.push(SrEdge {
                    src: NodeId(u as u32),
                    dst: NodeId(v as u32),
                    kind: SegmentKind::Node,
                    delay: m.max_delay,
                    cost: m.best_cost,
                });
            }
            let cands = &mut per_pair[u * n + v];
            cands.sort_unstable();
            let mut min_kept_w2 = u64::MAX;
            for &(w1, w2, iface) in cands.iter() {
                if let Some(m) = node_seg {
                    if m.max_delay <= w1 && m.best_cost <= w2 {
                        continue;
                    }
                }
                if w2 >= min_kept_w2 {
                    continue;
                }
                min_kept_w2 = w2;
                edges.push(SrEdge {
                    src: NodeId(u as u32),
                    dst: NodeId(v as u32),
                    kind: SegmentKind::Adjacency { interface: iface },
                    delay: w1,
                    cost: w2,
                });
            }
        }
    }
    SrGraph::from_edges(topo.labels().to_vec(), grain, edges)
        .expect("construction emits valid edges")
}

/// Synthetic double full-mesh: one node segment and one adjacency segment
/// per ordered pair, delays uniform in [1, spreading], costs uniform in
/// [1, 2^24]. Deterministic per seed.
pub fn generate_random_sr_graph(n_nodes: usize, spreading: u64, seed: u64) -> SrGraph {
    assert!(n_nodes >= 2, "need at least two nodes");
    assert!(spreading >= 1, "spreading must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..n_nodes).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::with_capacity(2 * n_nodes * (n_nodes - 1));
    for u in 0..n_nodes as u32 {
        for v in 0..n_nodes as u32 {
            if u == v {
                continue;
            }
            for kind in [SegmentKind::Node, SegmentKind::Adjacency { interface: 0 }] {
                edges.push(SrEdge {
                    src: NodeId(u),
                    dst: NodeId(v),
                    kind,
                    delay: rng.gen_range(1..=spreading),
                    cost: rng.gen_range(1..=MAX_IGP_COST as u64),
                });
            }
        }
    }
    SrGraph::from_edges(labels, AccuracyGrain::default(), edges).expect("generated edges are valid")
}

/// Every IGP-best path from u to v, as sequences of raw link indices, in
/// deterministic order. Errors out past `budget` path extensions.
pub fn ecmp_best_paths(
    topo: &RawTopology,
    u: NodeId,
    v: NodeId,
    budget: u64,
) -> Result<Vec<Vec<usize>>, SrGraphError> {
    let n = topo.node_count();
    let links = topo.links();
    let out_links = out_link_index(topo);
    // Delay values are irrelevant here; reuse the runner with zeroes.
    let zeroes = vec![0u64; links.len()];
    let run = single_source(topo, &zeroes, &out_links, u.index());
    if run.dist[v.index()] == u64::MAX {
        return Ok(Vec::new());
    }
    // DAG in-links per node, scanned in link-index order for determinism.
    let mut dag_in: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (li, l) in links.iter().enumerate() {
        let (a, b) = (l.src.index(), l.dst.index());
        if run.dist[a] != u64::MAX && run.dist[a] + l.igp_cost as u64 == run.dist[b] {
            dag_in[b].push(li);
        }
    }
    let mut paths = Vec::new();
    let mut suffix = Vec::new();
    let mut used = 0u64;
    walk_back(
        &dag_in,
        links,
        u.index(),
        v.index(),
        &mut suffix,
        &mut paths,
        &mut used,
        budget,
    )?;
    Ok(paths)
}

#[allow(clippy::too_many_arguments)]
fn walk_back(
    dag_in: &[Vec<usize>],
    links: &[crate::topology::RawLink],
    src: usize,
    at: usize,
    suffix: &mut Vec<usize>,
    paths: &mut Vec<Vec<usize>>,
    used: &mut u64,
    budget: u64,
) -> Result<(), SrGraphError> {
    if at == src {
        let mut path = suffix.clone();
        path.reverse();
        paths.push(path);
        return Ok(());
    }
    for &li in &dag_in[at] {
        *used += 1;
        if *used > budget {
            return Err(SrGraphError::BudgetExceeded { budget });
        }
        suffix.push(li);
        walk_back(
            dag_in,
            links,
            src,
            links[li].src.index(),
            suffix,
            paths,
            used,
            budget,
        )?;
        suffix.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::generate_random_raw;
    use proptest::prelude::*;

    fn grain10() -> AccuracyGrain {
        AccuracyGrain::new(10).unwrap()
    }

    #[test]
    fn rounding_is_ceiling_on_exact_decimals() {
        assert_eq!(round_delay(2150, grain10()), 22);
        assert_eq!(round_delay(0, grain10()), 0);
        assert_eq!(round_delay(6200, grain10()), 62);
        assert_eq!(round_delay(6150, grain10()), 62);
        assert_eq!(round_delay(1, grain10()), 1);
        assert_eq!(round_delay(10_000, AccuracyGrain::new(100).unwrap()), 1000);
    }

    // Two-node fragment: single-link pair quantizes per link.
    #[test]
    fn apsp_single_link_pair() {
        let t = RawTopology::parse_str("u v 0 1.0 5").unwrap();
        let apsp = apsp_ecmp(&t, grain10());
        let m = apsp
            .get(t.node_by_label("u").unwrap(), t.node_by_label("v").unwrap())
            .unwrap();
        assert_eq!(
            m,
            PairMetrics {
                best_cost: 5,
                max_delay: 10
            }
        );
        assert_eq!(
            apsp.get(t.node_by_label("v").unwrap(), t.node_by_label("u").unwrap()),
            None
        );
    }

    // ECMP fragment: three equal-cost n->r paths with delays 6.15, 2.3 and
    // 2.4 ms collapse into a (62; 3) node segment.
    #[test]
    fn apsp_takes_worst_ecmp_delay() {
        let t = RawTopology::parse_str(
            "n o 1 4.00 1\n\
             o r 1 2.15 2\n\
             n s 1 1.30 1\n\
             n s 2 1.40 1\n\
             s r 1 1.00 2\n",
        )
        .unwrap();
        let apsp = apsp_ecmp(&t, grain10());
        let m = apsp
            .get(t.node_by_label("n").unwrap(), t.node_by_label("r").unwrap())
            .unwrap();
        assert_eq!(
            m,
            PairMetrics {
                best_cost: 3,
                max_delay: 62
            }
        );
    }

    #[test]
    fn adjacency_kept_only_when_not_dominated() {
        // Node segment n->o is (40; 1); the 3.9 ms link survives at (39; 2),
        // a link equal to the node segment weights is dropped.
        let t = RawTopology::parse_str("n o 1 4.00 1\nn o 2 3.90 2\n").unwrap();
        let g = build_sr_graph(&t, grain10());
        let n = g.node_by_label("n").unwrap();
        let o = g.node_by_label("o").unwrap();
        let between = g.edges_between(n, o);
        assert_eq!(between.len(), 2);
        assert_eq!(between[0].kind, SegmentKind::Node);
        assert_eq!((between[0].delay, between[0].cost), (40, 1));
        assert_eq!(between[1].kind, SegmentKind::Adjacency { interface: 2 });
        assert_eq!((between[1].delay, between[1].cost), (39, 2));
    }

    #[test]
    fn tied_adjacencies_keep_lowest_interface() {
        let t = RawTopology::parse_str(
            "a b 3 9.0 1\n\
             a b 7 0.5 9\n\
             a b 4 0.5 9\n",
        )
        .unwrap();
        let g = build_sr_graph(&t, grain10());
        let kept: Vec<_> = g
            .edges_between(g.node_by_label("a").unwrap(), g.node_by_label("b").unwrap())
            .into_iter()
            .filter(|e| matches!(e.kind, SegmentKind::Adjacency { .. }))
            .collect();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].kind, SegmentKind::Adjacency { interface: 4 });
    }

    #[test]
    fn full_mesh_on_strongly_connected_input() {
        let t = generate_random_raw(9, 24, 5_000, 7).unwrap();
        let g = build_sr_graph(&t, grain10());
        let n = g.node_count();
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                if u == v {
                    continue;
                }
                let segs = g.edges_between(NodeId(u), NodeId(v));
                assert!(
                    segs.iter().any(|e| e.kind == SegmentKind::Node),
                    "missing node segment {u}->{v}"
                );
            }
        }
    }

    // Independent single-metric check: node segment w2 equals a plain
    // Bellman-Ford distance over IGP costs alone.
    #[test]
    #[allow(clippy::needless_range_loop)]
    fn node_segment_cost_matches_plain_shortest_path() {
        let t = generate_random_raw(10, 35, 5_000, 11).unwrap();
        let g = build_sr_graph(&t, grain10());
        let n = t.node_count();
        for src in 0..n {
            let mut dist = vec![u64::MAX; n];
            dist[src] = 0;
            for _ in 0..n {
                for l in t.links() {
                    let (a, b) = (l.src.index(), l.dst.index());
                    if dist[a] != u64::MAX && dist[a] + (l.igp_cost as u64) < dist[b] {
                        dist[b] = dist[a] + l.igp_cost as u64;
                    }
                }
            }
            for v in 0..n {
                if v == src {
                    continue;
                }
                let seg = g
                    .edges_between(NodeId(src as u32), NodeId(v as u32))
                    .into_iter()
                    .find(|e| e.kind == SegmentKind::Node);
                assert_eq!(
                    seg.map(|e| e.cost),
                    (dist[v] != u64::MAX).then_some(dist[v])
                );
            }
        }
    }

    // Brute-force certification of both APSP max-delay and the dominance
    // filter on small random graphs.
    #[test]
    #[allow(clippy::needless_range_loop)]
    fn small_graphs_match_enumeration_oracles() {
        for seed in 0..20u64 {
            let t = generate_random_raw(8, 20, 3_000, 100 + seed).unwrap();
            let n = t.node_count();
            let grain = grain10();
            let apsp = apsp_ecmp(&t, grain);
            let g = build_sr_graph(&t, grain);
            let quant: Vec<u64> = t
                .links()
                .iter()
                .map(|l| round_delay(l.delay_us, grain))
                .collect();

            for u in 0..n {
                // Enumerate all simple paths from u, tracking per-node
                // minimum cost and the worst delay among min-cost paths.
                let mut best: Vec<Option<(u64, u64)>> = vec![None; n];
                let mut visited = vec![false; n];
                visited[u] = true;
                fn dfs(
                    t: &RawTopology,
                    quant: &[u64],
                    visited: &mut Vec<bool>,
                    best: &mut Vec<Option<(u64, u64)>>,
                    at: usize,
                    cost: u64,
                    delay: u64,
                ) {
                    for (li, l) in t.links().iter().enumerate() {
                        if l.src.index() != at || visited[l.dst.index()] {
                            continue;
                        }
                        let v = l.dst.index();
                        let (c, d) = (cost + l.igp_cost as u64, delay + quant[li]);
                        best[v] = Some(match best[v] {
                            None => (c, d),
                            Some((bc, bd)) => {
                                if c < bc {
                                    (c, d)
                                } else if c == bc {
                                    (bc, bd.max(d))
                                } else {
                                    (bc, bd)
                                }
                            }
                        });
                        visited[v] = true;
                        dfs(t, quant, visited, best, v, c, d);
                        visited[v] = false;
                    }
                }
                dfs(&t, &quant, &mut visited, &mut best, u, 0, 0);
                for v in 0..n {
                    if v == u {
                        continue;
                    }
                    let expect = best[v].map(|(c, d)| PairMetrics {
                        best_cost: c,
                        max_delay: d,
                    });
                    assert_eq!(apsp.get(NodeId(u as u32), NodeId(v as u32)), expect);

                    // Kept edge set per pair is the Pareto-minimal subset of
                    // {node segment} ∪ {raw links}, resolved by interface.
                    let mut cands: Vec<(u64, u64, Option<u32>)> = Vec::new();
                    if let Some(m) = expect {
                        cands.push((m.max_delay, m.best_cost, None));
                    }
                    for l in t.links() {
                        if l.src.index() == u && l.dst.index() == v {
                            cands.push((
                                round_delay(l.delay_us, grain),
                                l.igp_cost as u64,
                                Some(l.interface),
                            ));
                        }
                    }
                    let mut expected_kept: Vec<(u64, u64, Option<u32>)> = Vec::new();
                    for &(w1, w2, iface) in &cands {
                        let dominated = cands.iter().any(|&(o1, o2, oif)| {
                            if (o1, o2, oif) == (w1, w2, iface) {
                                return false;
                            }
                            let weaker = o1 <= w1 && o2 <= w2;
                            if !weaker {
                                return false;
                            }
                            if (o1, o2) != (w1, w2) {
                                return true;
                            }
                            // Exact ties: node segment wins, then lowest interface.
                            match (oif, iface) {
                                (None, _) => true,
                                (Some(_), None) => false,
                                (Some(a), Some(b)) => a < b,
                            }
                        });
                        if !dominated {
                            expected_kept.push((w1, w2, iface));
                        }
                    }
                    let mut got: Vec<(u64, u64, Option<u32>)> = g
                        .edges_between(NodeId(u as u32), NodeId(v as u32))
                        .into_iter()
                        .map(|e| {
                            (
                                e.delay,
                                e.cost,
                                match e.kind {
                                    SegmentKind::Node => None,
                                    SegmentKind::Adjacency { interface } => Some(interface),
                                },
                            )
                        })
                        .collect();
                    expected_kept.sort();
                    got.sort();
                    assert_eq!(got, expected_kept, "pair {u}->{v} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn random_sr_graph_shape_and_determinism() {
        let g = generate_random_sr_graph(17, 100, 3);
        assert_eq!(g.edge_count(), 2 * 17 * 16);
        assert!(g.max_edge_delay() <= 100 && g.max_edge_delay() >= 1);
        let h = generate_random_sr_graph(17, 100, 3);
        let a: Vec<_> = g.edges().collect();
        let b: Vec<_> = h.edges().collect();
        assert_eq!(a, b);

        let tiny = generate_random_sr_graph(2, 1, 9);
        assert!(tiny.edges().all(|e| e.delay == 1));
    }

    #[test]
    fn edge_lookup_round_trips_through_index() {
        let g = generate_random_sr_graph(6, 50, 4);
        for idx in 0..g.edge_count() as u32 {
            let e = g.edge(idx);
            assert!(g.edges_between(e.src, e.dst).contains(&e));
        }
    }

    #[test]
    fn ecmp_paths_enumerates_the_best_path_set() {
        let t = RawTopology::parse_str(
            "r o 1 2.70 2\n\
             o p 1 0.88 2\n\
             o p 2 0.90 2\n",
        )
        .unwrap();
        let paths = ecmp_best_paths(
            &t,
            t.node_by_label("r").unwrap(),
            t.node_by_label("p").unwrap(),
            1_000,
        )
        .unwrap();
        assert_eq!(paths.len(), 2);
        for p in &paths {
            assert_eq!(p.len(), 2);
        }
    }

    proptest! {
        // Per-link ceilings over-approximate the path-level ceiling.
        #[test]
        fn quantize_then_sum_is_sound(delays in proptest::collection::vec(0u64..50_000, 1..8), t in 1u32..200) {
            let grain = AccuracyGrain::new(t).unwrap();
            let per_link: u64 = delays.iter().map(|&d| round_delay(d, grain)).sum();
            let whole = round_delay(delays.iter().sum(), grain);
            prop_assert!(per_link >= whole);
        }
    }
}
