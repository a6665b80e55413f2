//! Reference experiment batteries. Each function runs one of the headline
//! experiments end to end and reports pass/fail with a human-readable
//! detail line; the CLI `verify` command and the integration tests share
//! these implementations.

use crate::harness::{self, hop_profile, run, stability_slope, MetricsLog, Scenario};
use crate::net::ModelError;
use crate::oracle;
use crate::scenarios;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        CheckResult { name, pass, detail }
    }
}

/// Full-run packet conservation per selector: injected = delivered + still
/// queued, for both the counter system and the real packets.
pub fn conservation_holds(log: &MetricsLog) -> bool {
    (0..log.num_selectors).all(|s| {
        log.injected_shadow[s] == log.delivered_shadow[s] + log.queued_shadow_final[s]
            && log.injected_real[s] == log.delivered_real[s] + log.queued_real_final[s]
    })
}

/// No sustained backlog drift over the trailing half of the run, judged on
/// 25 batch means so queue autocorrelation does not shrink the interval.
/// Because queue series stay correlated at any batch size, a borderline
/// slope also passes when its projected drift over the window is smaller
/// than twice the series' own standard deviation — a real linear trend
/// cannot satisfy that (a ramp's deviation is only 0.29x its drift).
pub fn stable(series: &[u64]) -> bool {
    let (slope, ci) = match stability_slope(series, 25) {
        Ok(v) => v,
        Err(_) => return false,
    };
    if slope.abs() <= ci {
        return true;
    }
    let tail: Vec<f64> = series[series.len() / 2..]
        .iter()
        .map(|&v| v as f64)
        .collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / tail.len() as f64;
    slope.abs() * tail.len() as f64 <= 2.0 * var.sqrt()
}

fn rel_err(measured: f64, target: f64) -> f64 {
    (measured - target).abs() / target
}

/// Elastic chain vs the closed-form optimum: per-hop counter differential
/// over M tracks the equilibrium dual variable, and the measured source
/// rate tracks the optimal rate split.
pub fn check_oracle_match(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let n = 5;
    let m = 1000.0;
    let s = scenarios::scenario_linear_elastic(n, m, 0.99, slots, seed);
    let log = run(&s)?;
    let opt = oracle::linear_optimum_log(n, 10.0);
    let profile = hop_profile(&log, &s, 0).expect("fixed route");
    // profile is ordered nearest-destination first, so differences along it
    // are the per-hop differentials.
    let mut diffs = vec![profile[0]];
    for w in profile.windows(2) {
        diffs.push(w[1] - w[0]);
    }
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64 / m;
    let x0 = log.mean_shadow_rate[0];
    let diff_err = rel_err(mean_diff, opt.q_diff);
    let rate_err = rel_err(x0, opt.x0);
    let pass = diff_err < 0.20 && rate_err < 0.10 && stable(&log.shadow_total);
    Ok(CheckResult::new(
        "oracle-match",
        pass,
        format!(
            "hop differential {:.4} vs {:.4} ({:.1}% off), source rate {:.4} vs {:.4} ({:.1}% off)",
            mean_diff,
            opt.q_diff,
            diff_err * 100.0,
            x0,
            opt.x0,
            rate_err * 100.0
        ),
    ))
}

/// Long inelastic chain: the flow-0 counter profile grows linearly from
/// destination to source, while 1% thinning keeps real FIFO backlog far
/// below the counter backlog.
pub fn check_hop_profile_shape(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let s = scenarios::scenario_linear_inelastic(40, 5.0, 2.5, 0.99, slots, seed);
    let log = run(&s)?;
    let profile = hop_profile(&log, &s, 0).expect("fixed route");
    let points: Vec<(f64, f64)> = profile
        .iter()
        .enumerate()
        .map(|(i, &q)| (i as f64, q))
        .collect();
    let (slope, _) = harness::least_squares_ci(&points);
    let r2 = r_squared(&points, slope);
    let real_total: f64 = log.avg_fifo.iter().sum();
    let shadow_total = log.mean_shadow_backlog;
    let ratio = real_total / shadow_total;
    let pass = slope > 0.0 && r2 > 0.9 && ratio < 0.25;
    Ok(CheckResult::new(
        "hop-profile-shape",
        pass,
        format!(
            "profile slope {slope:.3}, R^2 {r2:.3}, real/shadow backlog ratio {ratio:.4}"
        ),
    ))
}

fn r_squared(points: &[(f64, f64)], slope: f64) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let sst: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    if sst == 0.0 {
        return 1.0;
    }
    1.0 - sse / sst
}

/// Grid scenario: real backlog shrinks monotonically as the thinning
/// deepens, and at 1% thinning sits well below the counter backlog.
pub fn check_grid_thinning(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let betas = [0.95, 0.97, 0.99];
    let mut reals = Vec::new();
    let mut shadow = 0.0;
    for &beta in &betas {
        let s = scenarios::scenario_grid16(1000.0, beta, slots, seed);
        let log = run(&s)?;
        reals.push(log.mean_real_backlog);
        if beta == 0.99 {
            shadow = log.mean_shadow_backlog;
        }
    }
    let ordered = reals[0] < reals[1] && reals[1] < reals[2] && reals[2] < shadow;
    let ratio = reals[2] / shadow;
    let pass = ordered && ratio < 0.1;
    Ok(CheckResult::new(
        "grid-thinning",
        pass,
        format!(
            "real backlog {:.1} (β=0.95) / {:.1} (β=0.97) / {:.1} (β=0.99), shadow {:.1}, ratio {:.4}",
            reals[0], reals[1], reals[2], shadow, ratio
        ),
    ))
}

/// Min-resource routing on the diamond: with M=10 each flow collapses onto
/// its direct link; with M=0 traffic spreads over most of the network.
pub fn check_minresource_routes(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let s = scenarios::scenario_diamond8(5.0, 10.0, slots, seed);
    let log = run(&s)?;
    let direct = [(3usize, 4usize), (1usize, 6usize)];
    let mut pass = true;
    let mut details = Vec::new();
    for (flow, &(a, b)) in direct.iter().enumerate() {
        let dest = b;
        let d = dest_index(&s, dest);
        let link = s.network.link_between(a, b).expect("direct link exists");
        let rate = log.allocation[link][d];
        let mut leak: f64 = 0.0;
        for l in 0..s.network.num_links() {
            if l != link {
                leak = leak.max(log.allocation[l][d]);
            }
        }
        if !(4.8..=5.2).contains(&rate) || leak >= 0.05 {
            pass = false;
        }
        details.push(format!("flow {flow}: direct rate {rate:.3}, max leak {leak:.4}"));
    }
    // Same scenario at M=0 reverts to destination-queue back-pressure and
    // should light up most of the topology.
    let s0 = scenarios::scenario_diamond8(5.0, 0.0, slots, seed);
    let log0 = run(&s0)?;
    let mut busy_pairs = 0;
    for &(a, b) in scenarios::diamond8_pairs().iter() {
        let mut rate: f64 = 0.0;
        for (u, v) in [(a, b), (b, a)] {
            if let Some(l) = s0.network.link_between(u, v) {
                for d in 0..log0.num_selectors {
                    rate = rate.max(log0.allocation[l][d]);
                }
            }
        }
        if rate > 0.1 {
            busy_pairs += 1;
        }
    }
    if busy_pairs < 8 {
        pass = false;
    }
    details.push(format!("M=0 busy link pairs: {busy_pairs}/10"));
    Ok(CheckResult::new("minresource-routes", pass, details.join("; ")))
}

fn dest_index(s: &Scenario, dest: usize) -> usize {
    let mut dests: Vec<usize> = s.flows.iter().map(|f| f.dest).collect();
    dests.sort_unstable();
    dests.dedup();
    dests.iter().position(|&d| d == dest).expect("known destination")
}

/// Backlog trade-off in the hop penalty M: M=10 beats M=0 across the load
/// sweep, while pushing M to 20 costs backlog at the lightest load.
pub fn check_m_tradeoff(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let lambdas = [5.0, 6.0, 7.0, 8.0, 9.0];
    let mut pass = true;
    let mut details = Vec::new();
    for &lambda in &lambdas {
        let b0 = run(&scenarios::scenario_diamond8(lambda, 0.0, slots, seed))?.mean_real_backlog;
        let b10 = run(&scenarios::scenario_diamond8(lambda, 10.0, slots, seed))?.mean_real_backlog;
        if b10 >= b0 {
            pass = false;
        }
        details.push(format!("λ={lambda}: M0 {b0:.1} vs M10 {b10:.1}"));
    }
    let b10 = run(&scenarios::scenario_diamond8(5.0, 10.0, slots, seed))?.mean_real_backlog;
    let b20 = run(&scenarios::scenario_diamond8(5.0, 20.0, slots, seed))?.mean_real_backlog;
    if b20 <= b10 {
        pass = false;
    }
    details.push(format!("λ=5: M20 {b20:.1} vs M10 {b10:.1}"));
    Ok(CheckResult::new("m-tradeoff", pass, details.join("; ")))
}

/// Flow-0 backlog on fixed-utilization chains grows roughly quadratically
/// with chain length. The 75% per-hop utilization is split as in the
/// long-chain scenario (long flow 5.0, cross traffic 2.5): the long flow
/// must carry the larger share for its per-hop differentials to stack up;
/// an even split equilibrates to a flat profile and linear growth.
pub fn check_backlog_scaling(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let mut points = Vec::new();
    for &n in &[5usize, 10, 20, 40] {
        let s = scenarios::scenario_linear_traditional(n, 5.0, 2.5, slots, seed);
        let log = run(&s)?;
        let flow0_backlog: f64 = (0..s.network.num_nodes())
            .map(|node| log.avg_queue_at(node, 0))
            .sum();
        points.push((n as f64, flow0_backlog));
    }
    let (exponent, ci) = oracle::backlog_scaling_fit(&points).expect("well-formed sweep");
    let pass = (1.6..=2.4).contains(&exponent);
    Ok(CheckResult::new(
        "backlog-scaling",
        pass,
        format!(
            "exponent {exponent:.3} ± {ci:.3} from backlogs {:?}",
            points.iter().map(|p| p.1.round()).collect::<Vec<_>>()
        ),
    ))
}

/// The shadow engine's counter trace equals a traditional-engine replay
/// fed the same arrival stream, on the chain and the grid.
pub fn check_trace_equivalence(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, scenario) in [
        ("chain", scenarios::scenario_linear_inelastic(5, 5.0, 2.5, 0.99, slots, seed)),
        ("grid", scenarios::scenario_grid16(1000.0, 0.99, slots, seed)),
    ] {
        let trace = harness::shadow_trace(&scenario)?;
        let trad = harness::traditional_trace(
            &scenario,
            &trace.shadow_arrivals,
            crate::engine::TieBreak::LowestId,
        )?;
        let equal = harness::shadow_equivalence_check(&trace.counters, &trad)
            .expect("traces of equal length");
        pass &= equal;
        details.push(format!("{name}: {}", if equal { "equal" } else { "DIVERGED" }));
    }
    Ok(CheckResult::new("trace-equivalence", pass, details.join("; ")))
}

/// No sustained backlog drift on one stable run per engine.
pub fn check_stability(slots: u64, seed: u64) -> Result<CheckResult, ModelError> {
    let mut details = Vec::new();
    let mut pass = true;
    for (name, scenario, use_shadow) in [
        ("chain-shadow", scenarios::scenario_linear_inelastic(10, 5.0, 2.5, 0.99, slots, seed), true),
        ("diamond-minresource", scenarios::scenario_diamond8(5.0, 10.0, slots, seed), false),
        ("chain-traditional", scenarios::scenario_linear_traditional(10, 3.75, 3.75, slots, seed), false),
    ] {
        let log = run(&scenario)?;
        let series = if use_shadow { &log.shadow_total } else { &log.real_total };
        let ok = stable(series);
        let (slope, _) = stability_slope(series, 25).expect("long series");
        pass &= ok;
        details.push(format!(
            "{name}: drift {slope:.5}/slot ({})",
            if ok { "stable" } else { "DRIFTING" }
        ));
    }
    Ok(CheckResult::new("stability", pass, details.join("; ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run;
    use crate::scenarios;

    #[test]
    fn trace_equivalence_short() {
        let r = check_trace_equivalence(500, 21).unwrap();
        assert!(r.pass, "{}", r.detail);
    }

    #[test]
    fn conservation_on_short_runs() {
        for s in [
            scenarios::scenario_linear_inelastic(5, 5.0, 2.5, 0.99, 500, 11),
            scenarios::scenario_linear_elastic(5, 100.0, 0.99, 500, 11),
            scenarios::scenario_diamond8(5.0, 10.0, 500, 11),
            scenarios::scenario_linear_traditional(5, 3.0, 3.0, 500, 11),
        ] {
            let log = run(&s).unwrap();
            assert!(conservation_holds(&log), "conservation failed for {:?}", s.engine);
        }
    }

    #[test]
    fn stable_flags_drift() {
        let flat: Vec<u64> = (0..4000).map(|t| 100 + (t % 7)).collect();
        assert!(stable(&flat));
        let drifting: Vec<u64> = (0..4000).map(|t| 100 + t / 2).collect();
        assert!(!stable(&drifting));
    }
}
