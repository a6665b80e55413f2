//! Min-resource adaptive routing: per-destination queues, weights penalized
//! by M per hop, next hops chosen by the scheduler.

use crate::engine::TieBreak;
use crate::net::{FlowSpec, ModelError, Network, TrafficModel};
use crate::solver::{max_weight_schedule, LinkWeights};

/// Adaptive-routing back-pressure with per-destination queues. Weight of a
/// link is max over destinations of (Q_tail - Q_head - M); M = 0 reverts to
/// the traditional algorithm. Inelastic flows only.
pub struct MinResourceEngine {
    network: Network,
    flows: Vec<FlowSpec>,
    m: f64,
    tie_break: TieBreak,
    /// Destinations appearing in any flow, ascending node id.
    dests: Vec<usize>,
    /// Per flow, index into `dests`.
    dest_of_flow: Vec<usize>,
    num_dests: usize,
    /// Q[node * num_dests + dest_index]; self-entries pinned at 0.
    q: Vec<u64>,
    snapshot: Vec<u64>,
    pub injected: Vec<u64>,
    pub delivered: Vec<u64>,
    /// Cumulative served packets per link per destination index.
    pub served: Vec<Vec<u64>>,
}

impl MinResourceEngine {
    pub fn new(
        network: Network,
        flows: Vec<FlowSpec>,
        m: f64,
        tie_break: TieBreak,
    ) -> Result<Self, ModelError> {
        if m < 0.0 {
            return Err(ModelError::BadScenario("M must be >= 0".into()));
        }
        let mut dests = Vec::new();
        for flow in &flows {
            flow.validate_endpoints_only(&network)?;
            if !matches!(flow.traffic, TrafficModel::Inelastic { .. }) {
                return Err(ModelError::BadScenario(format!(
                    "min-resource routing requires inelastic flows (flow {})",
                    flow.id
                )));
            }
            if !dests.contains(&flow.dest) {
                dests.push(flow.dest);
            }
        }
        dests.sort_unstable();
        let dest_of_flow = flows
            .iter()
            .map(|f| dests.iter().position(|&d| d == f.dest).unwrap())
            .collect();
        let num_dests = dests.len();
        let cells = network.num_nodes() * num_dests;
        let served = vec![vec![0; num_dests]; network.num_links()];
        Ok(MinResourceEngine {
            network,
            flows,
            m,
            tie_break,
            dests,
            dest_of_flow,
            num_dests,
            q: vec![0; cells],
            snapshot: vec![0; cells],
            injected: vec![0; num_dests],
            delivered: vec![0; num_dests],
            served,
        })
    }

    pub fn dests(&self) -> &[usize] {
        &self.dests
    }

    pub fn dest_of_flow(&self, flow: usize) -> usize {
        self.dest_of_flow[flow]
    }

    pub fn queue(&self, node: usize, dest_idx: usize) -> u64 {
        self.q[node * self.num_dests + dest_idx]
    }

    pub fn queues(&self) -> &[u64] {
        &self.q
    }

    pub fn total_backlog(&self) -> u64 {
        self.q.iter().sum()
    }

    /// w = max over destinations of (Q_tail - Q_head - M); ties to the
    /// lowest destination id.
    pub fn weights(&self) -> LinkWeights {
        let nd = self.num_dests;
        let entries = (0..self.network.num_links())
            .map(|idx| {
                let link = self.network.link(idx);
                let mut best: Option<(f64, u32)> = None;
                for d in 0..nd {
                    let tail = self.q[link.tail * nd + d] as f64;
                    let head = self.q[link.head * nd + d] as f64;
                    let w = tail - head - self.m;
                    match best {
                        Some((bw, _)) if !self.tie_break.replaces(w, bw) => {}
                        _ => best = Some((w, d as u32)),
                    }
                }
                best
            })
            .collect();
        LinkWeights::new(entries)
    }

    /// Advance one slot given this slot's external arrivals per flow.
    pub fn step(&mut self, arrivals: &[u64]) {
        assert_eq!(arrivals.len(), self.flows.len());
        let weights = self.weights();
        let schedule = max_weight_schedule(&self.network, &weights);
        self.snapshot.copy_from_slice(&self.q);
        let nd = self.num_dests;
        // `snapshot` doubles as the remaining beginning-of-slot budget so
        // two links draining the same (node, dest) queue cannot overdraw it.
        for idx in 0..self.network.num_links() {
            let rate = schedule.rates[idx];
            if rate == 0 {
                continue;
            }
            let d = schedule.selector[idx].unwrap() as usize;
            let link = self.network.link(idx);
            let moved = (rate as u64).min(self.snapshot[link.tail * nd + d]);
            if moved == 0 {
                continue;
            }
            self.snapshot[link.tail * nd + d] -= moved;
            self.q[link.tail * nd + d] -= moved;
            if link.head == self.dests[d] {
                self.delivered[d] += moved;
            } else {
                self.q[link.head * nd + d] += moved;
            }
            self.served[idx][d] += moved;
        }
        for (f, &a) in arrivals.iter().enumerate() {
            let d = self.dest_of_flow[f];
            self.q[self.flows[f].source * nd + d] += a;
            self.injected[d] += a;
        }
    }
}

impl FlowSpec {
    /// Endpoint-only validation for adaptive routing (no fixed route).
    pub(crate) fn validate_endpoints_only(&self, network: &Network) -> Result<(), ModelError> {
        if self.source == self.dest {
            return Err(ModelError::DegenerateFlow(self.id, self.source));
        }
        if self.source >= network.num_nodes() || self.dest >= network.num_nodes() {
            return Err(ModelError::DanglingEndpoint(
                self.source,
                self.dest,
                network.num_nodes(),
            ));
        }
        match &self.traffic {
            TrafficModel::Inelastic { lambda, epsilon } => {
                if *lambda <= 0.0 {
                    return Err(ModelError::BadTraffic(self.id, "lambda must be > 0".into()));
                }
                if *epsilon < 0.0 || *epsilon > 1.0 {
                    return Err(ModelError::BadTraffic(
                        self.id,
                        "epsilon must be in [0, 1]".into(),
                    ));
                }
            }
            TrafficModel::Elastic { .. } => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Interference, Link};
    use crate::scenarios;

    #[test]
    fn weight_examples() {
        let net = Network::build(
            2,
            vec![Link { tail: 0, head: 1, capacity: 10 }],
            Interference::None,
            10,
        )
        .unwrap();
        let flow = FlowSpec {
            id: 0,
            source: 0,
            dest: 1,
            route: None,
            traffic: TrafficModel::Inelastic { lambda: 1.0, epsilon: 0.0 },
        };
        let mut e = MinResourceEngine::new(net, vec![flow], 10.0, TieBreak::LowestId).unwrap();
        e.q = vec![15, 0]; // node 0 holds 15 for dest 1; node 1 pinned 0
        // Q_n = 15, Q_m = 0 (dest), M = 10 -> w = 5. With Q_n = 15 vs a head
        // backlog of 3 the differential would be 2; emulate by charging the
        // head... the head is the destination here, so check the plain case:
        assert_eq!(e.weights().get(0), Some((5.0, 0)));
        e.q = vec![5, 0];
        assert_eq!(e.weights().get(0), Some((-5.0, 0)));
        let s = max_weight_schedule(&e.network, &e.weights());
        assert!(s.rates.iter().all(|&r| r == 0));
        e.m = 0.0;
        assert_eq!(e.weights().get(0), Some((5.0, 0)));
    }

    #[test]
    fn m_penalty_subtracted_from_differential() {
        let net = Network::build(
            3,
            vec![
                Link { tail: 0, head: 1, capacity: 10 },
                Link { tail: 1, head: 2, capacity: 10 },
            ],
            Interference::None,
            10,
        )
        .unwrap();
        let flow = FlowSpec {
            id: 0,
            source: 0,
            dest: 2,
            route: None,
            traffic: TrafficModel::Inelastic { lambda: 1.0, epsilon: 0.0 },
        };
        let mut e = MinResourceEngine::new(net, vec![flow], 10.0, TieBreak::LowestId).unwrap();
        e.q = vec![15, 3, 0];
        assert_eq!(e.weights().get(0), Some((15.0 - 3.0 - 10.0, 0)));
    }

    #[test]
    fn elastic_flow_rejected() {
        let (net, _) = scenarios::diamond8(5.0);
        let flow = FlowSpec {
            id: 0,
            source: 3,
            dest: 4,
            route: None,
            traffic: TrafficModel::Elastic {
                utility: crate::traffic::UtilityKind::Log,
                x_max: 10.0,
            },
        };
        assert!(MinResourceEngine::new(net, vec![flow], 10.0, TieBreak::LowestId).is_err());
    }

    #[test]
    fn zero_queues_no_arrivals_noop() {
        let (net, flows) = scenarios::diamond8(5.0);
        let mut e = MinResourceEngine::new(net, flows, 10.0, TieBreak::LowestId).unwrap();
        e.step(&[0, 0]);
        assert_eq!(e.total_backlog(), 0);
        assert!(e.delivered.iter().all(|&d| d == 0));
    }

    #[test]
    fn conservation_per_destination() {
        let (net, flows) = scenarios::diamond8(5.0);
        let mut e = MinResourceEngine::new(net, flows, 10.0, TieBreak::LowestId).unwrap();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let arrivals: Vec<u64> = (0..2)
                .map(|_| crate::traffic::sample_poisson(5.0, &mut rng))
                .collect();
            e.step(&arrivals);
        }
        for d in 0..e.num_dests {
            let queued: u64 = (0..e.network.num_nodes()).map(|n| e.queue(n, d)).sum();
            assert_eq!(e.injected[d], queued + e.delivered[d], "dest {d}");
        }
    }
}
