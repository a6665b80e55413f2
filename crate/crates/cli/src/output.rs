//! CSV and manifest emission. Data files are byte-stable for a fixed
//! scenario and seed: no timestamps, no environment-dependent content;
//! floating values are printed to 6 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use bp_core::{MetricsLog, Scenario};

use crate::scenario_file::CliError;

/// Format to 6 significant digits in plain decimal notation.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))
}

/// Per-slot totals: `slot,shadow_total,real_total`.
pub fn series_csv(log: &MetricsLog) -> String {
    let mut out = String::from("slot,shadow_total,real_total\n");
    for (slot, (s, r)) in log.shadow_total.iter().zip(&log.real_total).enumerate() {
        writeln!(out, "{slot},{s},{r}").unwrap();
    }
    out
}

/// Per-queue time averages plus run-level scalars. One row per
/// (node, selector) shadow counter, per link FIFO, per selector injection
/// rate, and per scalar metric.
pub fn summary_csv(scenario: &Scenario, log: &MetricsLog) -> String {
    let mut out = String::from("metric,a,b,value\n");
    for node in 0..log.num_nodes {
        for sel in 0..log.num_selectors {
            writeln!(out, "shadow_queue,{node},{sel},{}", sig6(log.avg_queue_at(node, sel)))
                .unwrap();
        }
    }
    for (idx, link) in scenario.network.links().iter().enumerate() {
        writeln!(out, "fifo,{},{},{}", link.tail, link.head, sig6(log.avg_fifo[idx])).unwrap();
    }
    for (sel, rate) in log.mean_shadow_rate.iter().enumerate() {
        writeln!(out, "shadow_rate,{sel},,{}", sig6(*rate)).unwrap();
    }
    for (name, v) in [
        ("mean_latency", log.mean_latency),
        ("mean_real_throughput", log.mean_real_throughput),
        ("mean_real_backlog", log.mean_real_backlog),
        ("mean_shadow_backlog", log.mean_shadow_backlog),
    ] {
        writeln!(out, "{name},,,{}", sig6(v)).unwrap();
    }
    out
}

/// Served packets per slot per (link, selector), nonzero entries only:
/// `tail,head,selector,rate`.
pub fn allocation_csv(scenario: &Scenario, log: &MetricsLog) -> String {
    let mut out = String::from("tail,head,selector,rate\n");
    for (idx, link) in scenario.network.links().iter().enumerate() {
        for (sel, rate) in log.allocation[idx].iter().enumerate() {
            if *rate > 0.0 {
                writeln!(out, "{},{},{sel},{}", link.tail, link.head, sig6(*rate)).unwrap();
            }
        }
    }
    out
}

/// Queue profile along flow 0's fixed route, source first: the flow-0
/// shadow counter at each node, the other flows' counters at that node,
/// and the real FIFO of the outgoing route link. `None` when flow 0 has no
/// fixed route (adaptive routing).
pub fn hop_profile_csv(scenario: &Scenario, log: &MetricsLog) -> Option<String> {
    let route = scenario.flows.first()?.route.as_ref()?;
    let mut out = String::from("hop,node,flow0_shadow,other_shadow,link_fifo\n");
    for (hop, pair) in route.windows(2).enumerate() {
        let (node, next) = (pair[0], pair[1]);
        let link = scenario.network.link_between(node, next)?;
        let flow0: f64 = log.avg_queue_at(node, 0);
        let other: f64 = (1..log.num_selectors).map(|s| log.avg_queue_at(node, s)).sum();
        writeln!(
            out,
            "{hop},{node},{},{},{}",
            sig6(flow0),
            sig6(other),
            sig6(log.avg_fifo[link])
        )
        .unwrap();
    }
    Some(out)
}
