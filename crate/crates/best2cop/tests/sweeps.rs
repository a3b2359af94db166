//! Qualitative shape checks of the timing sweeps, asserted as order
//! statistics over medians rather than absolute times.

use std::collections::BTreeMap;
use std::sync::Mutex;

use best2cop::experiments::{
    median, run_constraint_sweep, run_spreading_sweep, ExperimentConfig, SpreadingMode,
    TimingRecord,
};

/// One timing sweep at a time.
static SERIAL: Mutex<()> = Mutex::new(());

fn medians_by<K: Ord + Copy>(
    records: &[TimingRecord],
    key: impl Fn(&TimingRecord) -> K,
) -> Vec<(K, u128)> {
    let mut groups: BTreeMap<K, Vec<u128>> = BTreeMap::new();
    for r in records {
        groups.entry(key(r)).or_default().push(r.time_ns);
    }
    groups
        .into_iter()
        .map(|(k, times)| (k, median(times)))
        .collect()
}

// Larger SR-graph spreadings first inflate the fronts, then push distances
// past gamma where pruning wins: the slowest point is interior, and the
// degenerate all-ones spreading is the cheapest.
#[test]
fn sr_spreading_rises_then_falls() {
    let _serial = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = ExperimentConfig {
        vertices: 300,
        spreadings: vec![1, 100, 400, 700, 1000, 1600, 2400],
        seeds_per_point: 3,
        sources: 1,
        warmup_runs: 1,
        ..Default::default()
    };
    let mut sink = Vec::new();
    let records = run_spreading_sweep(SpreadingMode::OnSrGraph, &cfg, &mut sink).unwrap();
    let medians = medians_by(&records, |r| r.spreading);
    let argmax = medians
        .iter()
        .enumerate()
        .max_by_key(|(_, (_, t))| *t)
        .map(|(i, _)| i)
        .unwrap();
    assert!(
        argmax > 0 && argmax < medians.len() - 1,
        "peak at a sweep endpoint: {medians:?}"
    );
    // Past gamma (= 1000 here) wholesale pruning can undercut anything, so
    // compare the degenerate all-ones point within the unpruned range only.
    let (s_min, t_min) = medians
        .iter()
        .filter(|(s, _)| *s <= 1000)
        .min_by_key(|(_, t)| *t)
        .copied()
        .unwrap();
    assert_eq!(
        s_min, 1,
        "all-ones spreading should be the cheapest unpruned point, got S={s_min} at {t_min} ns: {medians:?}"
    );
}

// Runtime grows with the delay constraint (more of the front survives), up
// to noise: Spearman rank correlation of the medians is non-negative.
#[test]
fn constraint_sweep_is_rank_correlated() {
    let _serial = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let cfg = ExperimentConfig {
        vertices: 300,
        spreadings: vec![1000],
        seeds_per_point: 10,
        c1_values_us: vec![1_000, 5_000, 20_000, 50_000, 100_000],
        sources: 1,
        warmup_runs: 1,
        ..Default::default()
    };
    let mut sink = Vec::new();
    let records = run_constraint_sweep(&cfg, &mut sink).unwrap();
    let medians = medians_by(&records, |r| r.c1_units);
    let n = medians.len() as f64;
    // values are already sorted by c1; rank the times
    let mut time_order: Vec<usize> = (0..medians.len()).collect();
    time_order.sort_by_key(|&i| medians[i].1);
    let mut rank = vec![0.0f64; medians.len()];
    for (r, &i) in time_order.iter().enumerate() {
        rank[i] = r as f64;
    }
    let d2: f64 = rank
        .iter()
        .enumerate()
        .map(|(i, &r)| (i as f64 - r).powi(2))
        .sum();
    let rho = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    assert!(rho >= 0.0, "Spearman rho {rho} negative: {medians:?}");
}
