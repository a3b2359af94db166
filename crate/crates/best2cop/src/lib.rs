#![forbid(unsafe_code)]

//! Exact delay-constrained least-cost path computation for Segment Routing
//! domains.
//!
//! The pipeline has three stages:
//!
//! 1. [`topology`] models raw two-metric network multigraphs (per-link delay
//!    and IGP cost) and handles parsing, generation and serialization.
//! 2. [`srgraph`] transforms a raw topology into a Segment Routing graph:
//!    delays are quantized to an accuracy grain, node segments are derived
//!    from ECMP-aware all-pairs shortest paths, and dominated adjacency
//!    segments are discarded.
//! 3. [`solver`] runs the segment-by-segment Pareto-front exploration that
//!    yields, for every destination, the exact set of non-dominated
//!    (delay, cost) distances reachable within a segment budget; [`solution`]
//!    extracts optimal segment lists for any objective from a run and decodes
//!    them back into physical path sets.
//!
//! [`oracle`] provides a brute-force reference solver used to certify the
//! solver on small instances, and [`experiments`] reproduces the evaluation
//! harness (timing sweeps, coverage studies) with CSV output.

pub mod cli;
pub mod experiments;
pub mod oracle;
pub mod solution;
pub mod solver;
pub mod srgraph;
pub mod topology;
