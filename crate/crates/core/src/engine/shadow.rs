//! The shadow algorithm: per-flow counters drive scheduling, one real FIFO
//! per link carries packets of all flows, and real transmissions are
//! permit-coupled to counter service.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;

use crate::engine::traditional::weights_from_queues;
use crate::engine::{FlowTopology, TieBreak};
use crate::net::{FlowSpec, ModelError, Network, TrafficModel};
use crate::solver::{max_weight_schedule, LinkWeights};
use crate::traffic::{elastic_arrivals, elastic_rate, inelastic_arrivals};

/// A real packet in a link FIFO. `hop` indexes the next link of its route.
#[derive(Debug, Clone, Copy)]
pub struct Packet {
    pub flow: u32,
    pub hop: usize,
    pub created: u64,
    enq_seq: u64,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ShadowStepStats {
    pub delivered_real: u64,
    pub latency_sum: u64,
}

struct LinkFifo {
    queue: VecDeque<Packet>,
    enq_count: u64,
    deq_count: u64,
}

impl LinkFifo {
    fn new() -> Self {
        LinkFifo { queue: VecDeque::new(), enq_count: 0, deq_count: 0 }
    }

    fn push(&mut self, mut pkt: Packet) {
        pkt.enq_seq = self.enq_count;
        self.enq_count += 1;
        self.queue.push_back(pkt);
    }

    fn pop(&mut self) -> Packet {
        let pkt = self.queue.pop_front().expect("pop on empty FIFO");
        // FIFO discipline: departures in arrival order.
        assert_eq!(pkt.enq_seq, self.deq_count, "FIFO order violated");
        self.deq_count += 1;
        pkt
    }
}

/// Engine parameters shared by all flows.
#[derive(Debug, Clone, Copy)]
pub struct ShadowParams {
    /// Congestion-control scaling M.
    pub m: f64,
    /// Thinning factor beta in (0, 1].
    pub beta: f64,
}

pub struct ShadowEngine {
    network: Network,
    flows: Vec<FlowSpec>,
    topo: FlowTopology,
    tie_break: TieBreak,
    params: ShadowParams,
    num_flows: usize,
    /// Shadow counters, node * num_flows + flow; destinations pinned at 0.
    q: Vec<u64>,
    snapshot: Vec<u64>,
    fifos: Vec<LinkFifo>,
    staged: Vec<Vec<Packet>>,
    real_in_network: u64,
    /// Shadow arrivals of the last slot, per flow (equivalence harness input).
    pub last_shadow_arrivals: Vec<u64>,
    pub injected_shadow: Vec<u64>,
    pub injected_real: Vec<u64>,
    pub delivered_shadow: Vec<u64>,
    pub delivered_real: Vec<u64>,
    /// Cumulative real packets served per link per flow.
    pub served_real: Vec<Vec<u64>>,
}

impl ShadowEngine {
    pub fn new(
        network: Network,
        flows: Vec<FlowSpec>,
        params: ShadowParams,
        tie_break: TieBreak,
    ) -> Result<Self, ModelError> {
        if params.beta <= 0.0 || params.beta > 1.0 {
            return Err(ModelError::BadScenario("beta must be in (0, 1]".into()));
        }
        if params.m <= 0.0 {
            return Err(ModelError::BadScenario("M must be > 0".into()));
        }
        let topo = FlowTopology::build(&network, &flows)?;
        let num_flows = flows.len();
        let cells = network.num_nodes() * num_flows;
        let num_links = network.num_links();
        Ok(ShadowEngine {
            network,
            flows,
            topo,
            tie_break,
            params,
            num_flows,
            q: vec![0; cells],
            snapshot: vec![0; cells],
            fifos: (0..num_links).map(|_| LinkFifo::new()).collect(),
            staged: vec![Vec::new(); num_links],
            real_in_network: 0,
            last_shadow_arrivals: vec![0; num_flows],
            injected_shadow: vec![0; num_flows],
            injected_real: vec![0; num_flows],
            delivered_shadow: vec![0; num_flows],
            delivered_real: vec![0; num_flows],
            served_real: vec![vec![0; num_flows]; num_links],
        })
    }

    pub fn counter(&self, node: usize, flow: usize) -> u64 {
        self.q[node * self.num_flows + flow]
    }

    pub fn counters(&self) -> &[u64] {
        &self.q
    }

    pub fn fifo_len(&self, link: usize) -> usize {
        self.fifos[link].queue.len()
    }

    pub fn total_shadow(&self) -> u64 {
        self.q.iter().sum()
    }

    pub fn total_real(&self) -> u64 {
        self.real_in_network
    }

    pub fn topology(&self) -> &FlowTopology {
        &self.topo
    }

    pub fn weights(&self) -> LinkWeights {
        weights_from_queues(
            &self.network,
            &self.topo,
            &self.q,
            self.num_flows,
            self.tie_break,
        )
    }

    /// Advance one slot: sources, scheduling from beginning-of-slot
    /// counters, shadow service, then permit-coupled real service.
    pub fn step(&mut self, slot: u64, rng: &mut ChaCha8Rng) -> ShadowStepStats {
        let nf = self.num_flows;
        self.snapshot.copy_from_slice(&self.q);
        // Weights and congestion-control rates see beginning-of-slot values.
        let weights = weights_from_queues(
            &self.network,
            &self.topo,
            &self.snapshot,
            nf,
            self.tie_break,
        );

        // 1. Sources, in flow id order.
        for f in 0..nf {
            let flow = &self.flows[f];
            let (shadow, real) = match &flow.traffic {
                TrafficModel::Elastic { utility, x_max } => {
                    let backlog = self.snapshot[flow.source * nf + f];
                    let x = elastic_rate(backlog, utility, self.params.m, *x_max);
                    elastic_arrivals(x, self.params.beta, rng)
                }
                // epsilon = 0 selects the fixed-rate thinning variant
                // (shadow at lambda, real a beta-thinned copy of the same
                // stream); epsilon > 0 couples an extra shadow packet per
                // real packet w.p. epsilon.
                TrafficModel::Inelastic { lambda, epsilon } => {
                    if *epsilon > 0.0 {
                        inelastic_arrivals(*lambda, *epsilon, rng)
                    } else {
                        elastic_arrivals(*lambda, self.params.beta, rng)
                    }
                }
            };
            self.last_shadow_arrivals[f] = shadow;
            self.q[flow.source * nf + f] += shadow;
            self.injected_shadow[f] += shadow;
            self.injected_real[f] += real;
            self.real_in_network += real;
            let first_link = self.topo.route_links[f][0];
            for _ in 0..real {
                self.fifos[first_link].push(Packet {
                    flow: f as u32,
                    hop: 0,
                    created: slot,
                    enq_seq: 0,
                });
            }
        }

        // 2. Scheduling.
        let schedule = max_weight_schedule(&self.network, &weights);

        // 3 + 4. Shadow service, then real service gated by shadow permits.
        let mut stats = ShadowStepStats::default();
        for idx in 0..self.network.num_links() {
            let rate = schedule.rates[idx];
            if rate == 0 {
                continue;
            }
            let f = schedule.selector[idx].unwrap() as usize;
            let link = self.network.link(idx);
            let shadow_served = (rate as u64).min(self.snapshot[link.tail * nf + f]);
            if shadow_served == 0 {
                continue;
            }
            self.q[link.tail * nf + f] -= shadow_served;
            if link.head == self.flows[f].dest {
                self.delivered_shadow[f] += shadow_served;
            } else {
                self.q[link.head * nf + f] += shadow_served;
            }
            // Real service: as many packets as shadow permits, FIFO order.
            let real_served = shadow_served.min(self.fifos[idx].queue.len() as u64);
            for _ in 0..real_served {
                let mut pkt = self.fifos[idx].pop();
                let pf = pkt.flow as usize;
                self.served_real[idx][pf] += 1;
                pkt.hop += 1;
                if pkt.hop == self.topo.route_links[pf].len() {
                    self.delivered_real[pf] += 1;
                    self.real_in_network -= 1;
                    stats.delivered_real += 1;
                    stats.latency_sum += slot - pkt.created;
                } else {
                    let next = self.topo.route_links[pf][pkt.hop];
                    self.staged[next].push(pkt);
                }
            }
        }
        // Forwarded packets enter their next FIFO after all links served,
        // in ascending sending-link index (staging preserved that order).
        for idx in 0..self.network.num_links() {
            let staged = std::mem::take(&mut self.staged[idx]);
            for pkt in staged {
                self.fifos[idx].push(pkt);
            }
        }
        stats
    }
}
