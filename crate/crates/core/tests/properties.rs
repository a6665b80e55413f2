//! Randomized property tests: the scheduling solver against its
//! brute-force oracle, congestion-control monotonicity, and run-level
//! invariants on arbitrary small scenarios.

use bp_core::harness::{run, EngineKind, EngineParams, Scenario};
use bp_core::net::{FlowSpec, Interference, Link, Network, TrafficModel};
use bp_core::solver::{brute_force_max_weight, LinkWeights};
use bp_core::traffic::elastic_rate;
use bp_core::{checks, max_weight_schedule, UtilityKind};
use proptest::prelude::*;

/// A random simple directed graph with at most `max_links` links (brute
/// force caps at 24) plus quarter-integer weights so exact float
/// comparisons of objectives are meaningful.
fn graph_and_weights(
    max_links: usize,
) -> impl Strategy<Value = (Network, LinkWeights)> {
    (4usize..=9)
        .prop_flat_map(move |nodes| {
            let link = (0..nodes, 0..nodes, 1u32..=10);
            (
                Just(nodes),
                proptest::collection::vec(link, 1..=max_links),
                proptest::collection::vec((-8i32..=32, proptest::bool::weighted(0.8)), max_links),
            )
        })
        .prop_map(|(nodes, raw_links, raw_weights)| {
            let mut seen = std::collections::HashSet::new();
            let links: Vec<Link> = raw_links
                .into_iter()
                .filter(|&(t, h, _)| t != h && seen.insert((t, h)))
                .map(|(tail, head, capacity)| Link { tail, head, capacity })
                .collect();
            let net = Network::build(nodes, links, Interference::NodeExclusive, 10).unwrap();
            let entries = (0..net.num_links())
                .map(|i| {
                    let (quarter, present) = raw_weights[i % raw_weights.len()];
                    present.then(|| (quarter as f64 * 0.25, net.link(i).capacity))
                })
                .collect();
            let weights = LinkWeights::new(entries);
            (net, weights)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The memoized matching solver is exact: same objective and same
    /// tie-broken schedule as exhaustive subset search.
    #[test]
    fn solver_matches_brute_force((net, weights) in graph_and_weights(14)) {
        let fast = max_weight_schedule(&net, &weights);
        let brute = brute_force_max_weight(&net, &weights).unwrap();
        let dense = weights.dense();
        prop_assert_eq!(fast.objective(&dense), brute.objective(&dense));
        prop_assert_eq!(fast, brute);
    }

    /// Congestion control is monotone: a longer ingress queue never raises
    /// the injection rate, and the rate stays within (0, x_max].
    #[test]
    fn elastic_rate_monotone(
        backlog in 0u64..100_000,
        step in 1u64..10_000,
        m in 1.0f64..10_000.0,
        x_max in 0.5f64..100.0,
        alpha in prop_oneof![Just(None), (0.25f64..8.0).prop_map(Some)],
    ) {
        let utility = match alpha {
            None => UtilityKind::Log,
            Some(a) => UtilityKind::AlphaFair { alpha: a },
        };
        let lo = elastic_rate(backlog, &utility, m, x_max);
        let hi = elastic_rate(backlog + step, &utility, m, x_max);
        prop_assert!(hi <= lo, "rate rose from {lo} to {hi} as the queue grew");
        prop_assert!(lo > 0.0 && lo <= x_max);
        prop_assert_eq!(elastic_rate(0, &utility, m, x_max), x_max);
    }

    /// Every engine conserves packets and is deterministic on random small
    /// chain scenarios.
    #[test]
    fn runs_conserve_and_repeat(
        n in 2usize..6,
        lambda0 in 0.5f64..4.0,
        lambda1 in 0.5f64..4.0,
        engine_pick in 0u8..3,
        seed in 0u64..1_000,
    ) {
        let (engine, flows_traffic): (EngineKind, TrafficModel) = match engine_pick {
            0 => (EngineKind::Traditional, TrafficModel::Inelastic { lambda: lambda0, epsilon: 0.0 }),
            1 => (EngineKind::Shadow, TrafficModel::Inelastic { lambda: lambda0, epsilon: 0.0 }),
            _ => (EngineKind::Shadow, TrafficModel::Elastic { utility: UtilityKind::Log, x_max: 20.0 }),
        };
        let links = (0..n).map(|i| Link { tail: i, head: i + 1, capacity: 10 }).collect();
        let network = Network::build(n + 1, links, Interference::None, 10).unwrap();
        let mut flows = vec![FlowSpec {
            id: 0,
            source: 0,
            dest: n,
            route: Some((0..=n).collect()),
            traffic: flows_traffic.clone(),
        }];
        for i in 1..=n {
            let mut traffic = flows_traffic.clone();
            if let TrafficModel::Inelastic { lambda, .. } = &mut traffic {
                *lambda = lambda1;
            }
            flows.push(FlowSpec {
                id: i as u32,
                source: i - 1,
                dest: i,
                route: Some(vec![i - 1, i]),
                traffic,
            });
        }
        let scenario = Scenario {
            network,
            flows,
            engine,
            params: EngineParams::default(),
            slots: 400,
            warmup: 200,
            seed,
        };
        let a = run(&scenario).unwrap();
        let b = run(&scenario).unwrap();
        prop_assert_eq!(&a, &b, "identical scenario produced different logs");
        prop_assert!(checks::conservation_holds(&a), "packet conservation violated");
        // Real arrivals are a thinning of the shadow stream: a source can
        // never inject more real packets than shadow packets.
        if engine == EngineKind::Shadow {
            for sel in 0..a.num_selectors {
                prop_assert!(
                    a.injected_real[sel] <= a.injected_shadow[sel],
                    "selector {sel} injected more real than shadow packets"
                );
            }
        }
    }

    /// Schedules never violate node-exclusive interference and never
    /// activate non-positive-weight links.
    #[test]
    fn schedules_are_valid((net, weights) in graph_and_weights(20)) {
        let schedule = max_weight_schedule(&net, &weights);
        prop_assert!(bp_core::net::is_valid_schedule(&net, &schedule));
        for idx in 0..net.num_links() {
            if schedule.rates[idx] > 0 {
                prop_assert!(weights.weight(idx) > 0.0, "activated non-positive link {idx}");
            }
        }
    }
}
