//! End-to-end acceptance battery. Each test prints one pass/fail line so
//! the suite output doubles as a checklist.

use bp_core::checks::{self, CheckResult};
use bp_core::harness::{
    run, shadow_equivalence_check, shadow_trace, stability_slope, traditional_trace,
};
use bp_core::engine::TieBreak;
use bp_core::solver::brute_force_max_weight;
use bp_core::{max_weight_schedule, scenarios, Interference, Link, LinkWeights, Network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(result: &CheckResult) {
    let verdict = if result.pass { "PASS" } else { "FAIL" };
    println!("{verdict} {}: {}", result.name, result.detail);
    assert!(result.pass, "{}: {}", result.name, result.detail);
}

#[test]
fn criterion_1_oracle_match() {
    report(&checks::check_oracle_match(500_000, 1).unwrap());
}

#[test]
fn criterion_2_hop_profile_shape() {
    report(&checks::check_hop_profile_shape(1_000_000, 1).unwrap());
}

#[test]
fn criterion_3_grid_thinning() {
    report(&checks::check_grid_thinning(1_000_000, 3).unwrap());
}

#[test]
fn criterion_4_minresource_routes() {
    report(&checks::check_minresource_routes(200_000, 4).unwrap());
}

#[test]
fn criterion_5_m_tradeoff() {
    report(&checks::check_m_tradeoff(200_000, 5).unwrap());
}

#[test]
fn criterion_6_backlog_scaling() {
    report(&checks::check_backlog_scaling(3_000_000, 6).unwrap());
}

#[test]
fn criterion_7a_solver_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..200 {
        let num_nodes = rng.gen_range(4..=10);
        let mut links = Vec::new();
        while links.len() < rng.gen_range(3..=20) {
            let tail = rng.gen_range(0..num_nodes);
            let head = rng.gen_range(0..num_nodes);
            if tail == head
                || links
                    .iter()
                    .any(|l: &Link| l.tail == tail && l.head == head)
            {
                continue;
            }
            links.push(Link { tail, head, capacity: rng.gen_range(1..=10) });
        }
        let network = Network::build(num_nodes, links, Interference::NodeExclusive, 10).unwrap();
        let entries: Vec<Option<(f64, u32)>> = (0..network.num_links())
            .map(|_| {
                if rng.gen_bool(0.2) {
                    None
                } else {
                    // quarter-integer weights keep objective sums exact
                    Some((rng.gen_range(-8..=32) as f64 * 0.25, rng.gen_range(0..3)))
                }
            })
            .collect();
        let weights = LinkWeights::new(entries);
        let fast = max_weight_schedule(&network, &weights);
        let slow = brute_force_max_weight(&network, &weights).unwrap();
        assert_eq!(
            fast.objective(&weights.dense()),
            slow.objective(&weights.dense()),
            "case {case}: objective mismatch"
        );
        assert_eq!(fast, slow, "case {case}: schedule mismatch");
    }
    println!("PASS solver-oracle: 200 random instances, exact objective and schedule match");
}

#[test]
fn criterion_7b_trace_equivalence() {
    for (name, scenario) in [
        ("chain", scenarios::scenario_linear_inelastic(5, 5.0, 2.5, 0.99, 1000, 70)),
        ("grid", scenarios::scenario_grid16(1000.0, 0.99, 1000, 71)),
    ] {
        let trace = shadow_trace(&scenario).unwrap();
        let trad =
            traditional_trace(&scenario, &trace.shadow_arrivals, TieBreak::LowestId).unwrap();
        assert!(
            shadow_equivalence_check(&trace.counters, &trad).unwrap(),
            "{name}: counter trace diverged from traditional replay"
        );
    }
    println!("PASS trace-equivalence: shadow counters equal traditional replay on chain and grid");
}

#[test]
fn criterion_7c_conservation() {
    for (name, scenario) in [
        ("chain-inelastic", scenarios::scenario_linear_inelastic(10, 5.0, 2.5, 0.99, 5000, 72)),
        ("chain-elastic", scenarios::scenario_linear_elastic(5, 1000.0, 0.99, 5000, 72)),
        ("grid", scenarios::scenario_grid16(1000.0, 0.99, 2000, 72)),
        ("diamond", scenarios::scenario_diamond8(5.0, 10.0, 5000, 72)),
        ("chain-traditional", scenarios::scenario_linear_traditional(10, 3.75, 3.75, 5000, 72)),
    ] {
        let log = run(&scenario).unwrap();
        assert!(checks::conservation_holds(&log), "{name}: packet conservation violated");
    }
    println!("PASS conservation: injected = delivered + queued on every engine");
}

#[test]
fn criterion_7d_determinism() {
    for scenario in [
        scenarios::scenario_linear_inelastic(10, 5.0, 2.5, 0.99, 2000, 73),
        scenarios::scenario_grid16(1000.0, 0.99, 500, 73),
        scenarios::scenario_diamond8(5.0, 10.0, 2000, 73),
        scenarios::scenario_linear_traditional(10, 3.75, 3.75, 2000, 73),
    ] {
        let a = run(&scenario).unwrap();
        let b = run(&scenario).unwrap();
        assert_eq!(a, b, "repeated run was not bit-identical");
    }
    println!("PASS determinism: repeated runs bit-identical on every engine");
}

#[test]
fn criterion_7e_stability() {
    for (name, scenario, use_shadow) in [
        ("chain-shadow", scenarios::scenario_linear_inelastic(10, 5.0, 2.5, 0.99, 400_000, 74), true),
        ("diamond-minresource", scenarios::scenario_diamond8(5.0, 10.0, 400_000, 74), false),
        ("chain-traditional", scenarios::scenario_linear_traditional(10, 3.75, 3.75, 400_000, 74), false),
    ] {
        let log = run(&scenario).unwrap();
        let series = if use_shadow { &log.shadow_total } else { &log.real_total };
        let (slope, ci) = stability_slope(series, 25).unwrap();
        assert!(
            checks::stable(series),
            "{name}: drift {slope:.5} per slot (CI ±{ci:.5}) indicates instability"
        );
    }
    println!("PASS stability: trailing-half trend slope CI contains 0 on stable runs");
}
