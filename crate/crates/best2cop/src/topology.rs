//! Raw two-metric network multigraphs: parsing, validation, generation and
//! serialization.
//!
//! Link delays are carried as an exact integer count of a 0.001 ms sub-grain
//! (microseconds) so that quantization downstream is reproducible bit-exactly,
//! with no binary-fraction drift from decimal inputs.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Sub-grain resolution of stored delays: 1000 units per millisecond.
pub const SUBGRAIN_PER_MS: u64 = 1000;

/// Maximum IGP cost, inclusive.
pub const MAX_IGP_COST: u32 = 1 << 24;

/// Dense node index, unique within a topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A directed link with an interface number local to `src` (the multigraph
/// can hold several parallel links per node pair).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawLink {
    pub src: NodeId,
    pub dst: NodeId,
    pub interface: u32,
    /// Delay in 0.001 ms units.
    pub delay_us: u64,
    pub igp_cost: u32,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate link ({src},{dst},{interface})")]
    DuplicateLink {
        line: usize,
        src: String,
        dst: String,
        interface: u32,
    },
    #[error("line {line}: igp cost {cost} outside [1, 2^24]")]
    CostOutOfRange { line: usize, cost: u64 },
    #[error("line {line}: negative delay")]
    NegativeDelay { line: usize },
    #[error("line {line}: self-loop {node}")]
    SelfLoop { line: usize, node: String },
    #[error("empty topology")]
    Empty,
    #[error("unknown node label {0:?}")]
    UnknownNode(String),
    #[error("cannot build a strongly connected graph: {0}")]
    InfeasibleGeneration(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Directed multigraph with per-link (delay, IGP cost) weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTopology {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    links: Vec<RawLink>,
}

impl RawTopology {
    pub fn new() -> Self {
        RawTopology {
            labels: Vec::new(),
            index: HashMap::new(),
            links: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn links(&self) -> &[RawLink] {
        &self.links
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// Registers a label if new, returning its dense id (first-appearance
    /// order).
    pub fn intern(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = NodeId(self.labels.len() as u32);
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn add_link(&mut self, link: RawLink) {
        self.links.push(link);
    }

    /// Next free interface number for the ordered pair, used when the input
    /// omits the interface column.
    pub fn next_interface(&self, src: NodeId, dst: NodeId) -> u32 {
        self.links
            .iter()
            .filter(|l| l.src == src && l.dst == dst)
            .count() as u32
    }

    pub fn out_links(&self, node: NodeId) -> impl Iterator<Item = &RawLink> {
        self.links.iter().filter(move |l| l.src == node)
    }

    pub fn find_link(&self, src: NodeId, dst: NodeId, interface: u32) -> Option<&RawLink> {
        self.links
            .iter()
            .find(|l| l.src == src && l.dst == dst && l.interface == interface)
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut out = vec![Vec::new(); n];
        let mut rin = vec![Vec::new(); n];
        for l in &self.links {
            out[l.src.index()].push(l.dst.index());
            rin[l.dst.index()].push(l.src.index());
        }
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        count += 1;
                        stack.push(v);
                    }
                }
            }
            count == n
        };
        reach(&out) && reach(&rin)
    }

    /// Parses the edge-list text format.
    ///
    /// One record per line: `<src> <dst> [<interface>] <delay-ms> <igp-cost>`
    /// (the interface column may be omitted; ids are then assigned in file
    /// order per pair). `#` starts a comment. Directives: `@undirected`
    /// (before any record) expands each record into both directions,
    /// `@nodes l1 l2 ...` pre-registers labels so link-less nodes survive a
    /// round trip.
    pub fn parse(reader: impl BufRead) -> Result<Self, TopologyError> {
        let mut topo = RawTopology::new();
        let mut undirected = false;
        let mut saw_record = false;
        let mut seen: HashMap<(NodeId, NodeId, u32), ()> = HashMap::new();

        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line?;
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => &line[..],
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields[0] == "@undirected" {
                if saw_record {
                    return Err(TopologyError::Syntax {
                        line: lineno,
                        msg: "@undirected must precede all records".into(),
                    });
                }
                undirected = true;
                continue;
            }
            if fields[0] == "@nodes" {
                for label in &fields[1..] {
                    topo.intern(label);
                }
                continue;
            }
            let (src_l, dst_l, iface, delay_s, cost_s) = match fields.len() {
                5 => (
                    fields[0],
                    fields[1],
                    Some(parse_u32(fields[2], lineno, "interface")?),
                    fields[3],
                    fields[4],
                ),
                4 => (fields[0], fields[1], None, fields[2], fields[3]),
                n => {
                    return Err(TopologyError::Syntax {
                        line: lineno,
                        msg: format!("expected 4 or 5 fields, got {n}"),
                    })
                }
            };
            saw_record = true;
            if src_l == dst_l {
                return Err(TopologyError::SelfLoop {
                    line: lineno,
                    node: src_l.to_string(),
                });
            }
            let delay_us = parse_delay_ms(delay_s, lineno)?;
            let cost64: u64 = cost_s.parse().map_err(|_| TopologyError::Syntax {
                line: lineno,
                msg: format!("bad igp cost {cost_s:?}"),
            })?;
            if cost64 < 1 || cost64 > MAX_IGP_COST as u64 {
                return Err(TopologyError::CostOutOfRange {
                    line: lineno,
                    cost: cost64,
                });
            }
            let src = topo.intern(src_l);
            let dst = topo.intern(dst_l);
            let mut push = |topo: &mut RawTopology, src: NodeId, dst: NodeId| {
                let interface = iface.unwrap_or_else(|| topo.next_interface(src, dst));
                if seen.insert((src, dst, interface), ()).is_some() {
                    return Err(TopologyError::DuplicateLink {
                        line: lineno,
                        src: topo.label(src).to_string(),
                        dst: topo.label(dst).to_string(),
                        interface,
                    });
                }
                topo.add_link(RawLink {
                    src,
                    dst,
                    interface,
                    delay_us,
                    igp_cost: cost64 as u32,
                });
                Ok(())
            };
            push(&mut topo, src, dst)?;
            if undirected {
                push(&mut topo, dst, src)?;
            }
        }
        if topo.node_count() == 0 {
            return Err(TopologyError::Empty);
        }
        Ok(topo)
    }

    pub fn parse_str(input: &str) -> Result<Self, TopologyError> {
        Self::parse(input.as_bytes())
    }

    /// Serializes so that `parse(write(t)) == t`.
    pub fn write(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "@nodes")?;
        for label in &self.labels {
            write!(w, " {label}")?;
        }
        writeln!(w)?;
        for l in &self.links {
            writeln!(
                w,
                "{} {} {} {} {}",
                self.label(l.src),
                self.label(l.dst),
                l.interface,
                format_ms(l.delay_us),
                l.igp_cost
            )?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("topology text is utf-8")
    }
}

impl Default for RawTopology {
    fn default() -> Self {
        Self::new()
    }
}

fn parse_u32(s: &str, line: usize, what: &str) -> Result<u32, TopologyError> {
    s.parse().map_err(|_| TopologyError::Syntax {
        line,
        msg: format!("bad {what} {s:?}"),
    })
}

/// Parses a decimal millisecond value into 0.001 ms units. At most three
/// fractional digits are representable; finer input is rejected rather than
/// silently rounded.
fn parse_delay_ms(s: &str, line: usize) -> Result<u64, TopologyError> {
    if s.starts_with('-') {
        return Err(TopologyError::NegativeDelay { line });
    }
    let bad = || TopologyError::Syntax {
        line,
        msg: format!("bad delay {s:?}"),
    };
    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if frac_part.len() > 3 {
        return Err(TopologyError::Syntax {
            line,
            msg: format!("delay {s:?} finer than the 0.001 ms sub-grain"),
        });
    }
    let int: u64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let mut frac: u64 = 0;
    if !frac_part.is_empty() {
        frac = frac_part.parse().map_err(|_| bad())?;
        for _ in frac_part.len()..3 {
            frac *= 10;
        }
    }
    int.checked_mul(SUBGRAIN_PER_MS)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(bad)
}

/// Formats 0.001 ms units back as a decimal millisecond string.
pub fn format_ms(delay_us: u64) -> String {
    let int = delay_us / SUBGRAIN_PER_MS;
    let frac = delay_us % SUBGRAIN_PER_MS;
    if frac == 0 {
        return int.to_string();
    }
    let mut s = String::new();
    write!(s, "{int}.{frac:03}").unwrap();
    while s.ends_with('0') {
        s.pop();
    }
    s
}

/// Generates a strongly connected directed multigraph: a random cycle through
/// all nodes plus uniformly random extra links. IGP costs are uniform in
/// [1, 2^24], delays uniform in (0, max_delay_us]. Deterministic per seed.
pub fn generate_random_raw(
    n_nodes: usize,
    n_links: usize,
    max_delay_us: u64,
    seed: u64,
) -> Result<RawTopology, TopologyError> {
    if n_nodes == 0 {
        return Err(TopologyError::InfeasibleGeneration("no nodes".into()));
    }
    if max_delay_us == 0 {
        return Err(TopologyError::InfeasibleGeneration(
            "max delay must be positive".into(),
        ));
    }
    if n_nodes == 1 {
        if n_links > 0 {
            return Err(TopologyError::InfeasibleGeneration(
                "single node admits no self-loop links".into(),
            ));
        }
    } else if n_links < n_nodes {
        return Err(TopologyError::InfeasibleGeneration(format!(
            "{n_links} directed links cannot strongly connect {n_nodes} nodes (need at least {n_nodes})",
        )));
    }

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
            igp_cost: rng.gen_range(1..=MAX_IGP_COST),
        });
    };

    if n_nodes >= 2 {
        for i in 0..n_nodes {
            let src = order[i];
            let dst = order[(i + 1) % n_nodes];
            add(&mut topo, &mut rng, src, dst);
        }
    }
    for _ in topo.links.len()..n_links {
        let src = rng.gen_range(0..n_nodes as u32);
        let dst = loop {
            let d = rng.gen_range(0..n_nodes as u32);
            if d != src {
                break d;
            }
        };
        add(&mut topo, &mut rng, src, dst);
    }
    Ok(topo)
}
