//! Canonical experiment networks: the linear chain, the 4x4 grid, and the
//! 8-node diamond, plus convenience constructors for full scenarios.

use crate::harness::{EngineKind, EngineParams, Scenario};
use crate::net::{FlowSpec, Interference, Link, Network, TrafficModel, DEFAULT_C_MAX};
use crate::traffic::UtilityKind;

/// Default elastic rate cap: 2 * c_max.
pub const DEFAULT_X_MAX: f64 = 2.0 * DEFAULT_C_MAX as f64;

/// Chain of `n` links (n + 1 nodes), all capacity `cap`, no interference.
pub fn linear_network(n: usize, cap: u32) -> Network {
    let links = (0..n)
        .map(|i| Link { tail: i, head: i + 1, capacity: cap })
        .collect();
    Network::build(n + 1, links, Interference::None, cap.max(DEFAULT_C_MAX)).unwrap()
}

fn chain_flows(n: usize, traffic_long: TrafficModel, traffic_short: TrafficModel) -> Vec<FlowSpec> {
    let mut flows = Vec::with_capacity(n + 1);
    // Flow 0 traverses the whole chain; flows 1..=n each cover one link.
    flows.push(FlowSpec {
        id: 0,
        source: 0,
        dest: n,
        route: Some((0..=n).collect()),
        traffic: traffic_long,
    });
    for i in 1..=n {
        flows.push(FlowSpec {
            id: i as u32,
            source: i - 1,
            dest: i,
            route: Some(vec![i - 1, i]),
            traffic: traffic_short.clone(),
        });
    }
    flows
}

/// Linear network with one long inelastic flow (rate `lambda0`) and one
/// single-hop inelastic flow per link (rate `lambda1`).
pub fn linear_inelastic(
    n: usize,
    lambda0: f64,
    lambda1: f64,
    epsilon: f64,
) -> (Network, Vec<FlowSpec>) {
    let net = linear_network(n, 10);
    let flows = chain_flows(
        n,
        TrafficModel::Inelastic { lambda: lambda0, epsilon },
        TrafficModel::Inelastic { lambda: lambda1, epsilon },
    );
    (net, flows)
}

/// Linear network with log-utility elastic flows (the proportional-fairness
/// chain with closed-form optimum).
pub fn linear_elastic(n: usize, x_max: f64) -> (Network, Vec<FlowSpec>) {
    let net = linear_network(n, 10);
    let elastic = TrafficModel::Elastic { utility: UtilityKind::Log, x_max };
    let flows = chain_flows(n, elastic.clone(), elastic);
    (net, flows)
}

/// 4x4 grid: 16 nodes, 24 links (rightward and downward lattice edges,
/// capacity 10), one-hop interference, 48 log-utility elastic flows.
///
/// The 48 flows are a deterministic pattern: for every row, one flow per
/// ordered left-to-right node pair routed along the row (6 per row, 24
/// total), and symmetrically one flow per top-to-bottom pair per column.
pub fn grid16() -> (Network, Vec<FlowSpec>) {
    let node = |r: usize, c: usize| r * 4 + c;
    let mut links = Vec::with_capacity(24);
    for r in 0..4 {
        for c in 0..3 {
            links.push(Link { tail: node(r, c), head: node(r, c + 1), capacity: 10 });
        }
    }
    for c in 0..4 {
        for r in 0..3 {
            links.push(Link { tail: node(r, c), head: node(r + 1, c), capacity: 10 });
        }
    }
    let net = Network::build(16, links, Interference::NodeExclusive, DEFAULT_C_MAX).unwrap();
    let elastic = TrafficModel::Elastic { utility: UtilityKind::Log, x_max: DEFAULT_X_MAX };
    let mut flows = Vec::with_capacity(48);
    for r in 0..4 {
        for c1 in 0..4 {
            for c2 in (c1 + 1)..4 {
                flows.push(FlowSpec {
                    id: flows.len() as u32,
                    source: node(r, c1),
                    dest: node(r, c2),
                    route: Some((c1..=c2).map(|c| node(r, c)).collect()),
                    traffic: elastic.clone(),
                });
            }
        }
    }
    for c in 0..4 {
        for r1 in 0..4 {
            for r2 in (r1 + 1)..4 {
                flows.push(FlowSpec {
                    id: flows.len() as u32,
                    source: node(r1, c),
                    dest: node(r2, c),
                    route: Some((r1..=r2).map(|r| node(r, c)).collect()),
                    traffic: elastic.clone(),
                });
            }
        }
    }
    debug_assert_eq!(flows.len(), 48);
    (net, flows)
}

/// The 8-node diamond network: the 10 undirected links of the adaptive
/// routing experiment, materialized as 20 directed links (both
/// orientations) so packets may traverse an edge either way. Capacity 10,
/// node-exclusive interference. Flow 0: 3 -> 4; flow 1: 1 -> 6, both
/// inelastic at rate `lambda`, routes unspecified (adaptive).
pub fn diamond8(lambda: f64) -> (Network, Vec<FlowSpec>) {
    let pairs = [
        (0, 1),
        (1, 2),
        (0, 3),
        (1, 6),
        (2, 4),
        (3, 4),
        (3, 5),
        (4, 7),
        (5, 6),
        (6, 7),
    ];
    let mut links = Vec::with_capacity(20);
    for &(a, b) in &pairs {
        links.push(Link { tail: a, head: b, capacity: 10 });
    }
    for &(a, b) in &pairs {
        links.push(Link { tail: b, head: a, capacity: 10 });
    }
    let net = Network::build(8, links, Interference::NodeExclusive, DEFAULT_C_MAX).unwrap();
    let traffic = TrafficModel::Inelastic { lambda, epsilon: 0.0 };
    let flows = vec![
        FlowSpec { id: 0, source: 3, dest: 4, route: None, traffic: traffic.clone() },
        FlowSpec { id: 1, source: 1, dest: 6, route: None, traffic },
    ];
    (net, flows)
}

/// The undirected link pairs of [`diamond8`], in table order.
pub fn diamond8_pairs() -> [(usize, usize); 10] {
    [
        (0, 1),
        (1, 2),
        (0, 3),
        (1, 6),
        (2, 4),
        (3, 4),
        (3, 5),
        (4, 7),
        (5, 6),
        (6, 7),
    ]
}

/// Shadow-engine scenario on the inelastic chain (the fixed-rate thinning
/// experiment): n links, lambda0 long flow, lambda1 short flows.
pub fn scenario_linear_inelastic(
    n: usize,
    lambda0: f64,
    lambda1: f64,
    beta: f64,
    slots: u64,
    seed: u64,
) -> Scenario {
    let (network, flows) = linear_inelastic(n, lambda0, lambda1, 0.0);
    Scenario {
        network,
        flows,
        engine: EngineKind::Shadow,
        params: EngineParams { m: 1000.0, beta, ..EngineParams::default() },
        slots,
        warmup: slots / 2,
        seed,
    }
}

/// Shadow-engine scenario on the elastic log-utility chain.
pub fn scenario_linear_elastic(n: usize, m: f64, beta: f64, slots: u64, seed: u64) -> Scenario {
    let (network, flows) = linear_elastic(n, DEFAULT_X_MAX);
    Scenario {
        network,
        flows,
        engine: EngineKind::Shadow,
        params: EngineParams { m, beta, ..EngineParams::default() },
        slots,
        warmup: slots / 2,
        seed,
    }
}

/// Shadow-engine scenario on the 4x4 grid.
pub fn scenario_grid16(m: f64, beta: f64, slots: u64, seed: u64) -> Scenario {
    let (network, flows) = grid16();
    Scenario {
        network,
        flows,
        engine: EngineKind::Shadow,
        params: EngineParams { m, beta, ..EngineParams::default() },
        slots,
        warmup: slots / 2,
        seed,
    }
}

/// Min-resource scenario on the diamond network.
pub fn scenario_diamond8(lambda: f64, m: f64, slots: u64, seed: u64) -> Scenario {
    let (network, flows) = diamond8(lambda);
    Scenario {
        network,
        flows,
        engine: EngineKind::MinResource,
        params: EngineParams { m, ..EngineParams::default() },
        slots,
        warmup: slots / 2,
        seed,
    }
}

/// Traditional-engine scenario on the inelastic chain.
pub fn scenario_linear_traditional(
    n: usize,
    lambda0: f64,
    lambda1: f64,
    slots: u64,
    seed: u64,
) -> Scenario {
    let (network, flows) = linear_inelastic(n, lambda0, lambda1, 0.0);
    Scenario {
        network,
        flows,
        engine: EngineKind::Traditional,
        params: EngineParams::default(),
        slots,
        warmup: slots / 2,
        seed,
    }
}
