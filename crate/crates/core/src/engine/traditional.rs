//! Baseline back-pressure with per-flow physical queues and fixed routes.

use crate::engine::{FlowTopology, TieBreak};
use crate::net::{FlowSpec, ModelError, Network};
use crate::solver::{max_weight_schedule, LinkWeights};

/// Per-flow queues at every node; differential-backlog weights; max-weight
/// scheduling. Queue updates use beginning-of-slot values, then external
/// arrivals are added at each flow's source.
pub struct TraditionalEngine {
    network: Network,
    flows: Vec<FlowSpec>,
    topo: FlowTopology,
    tie_break: TieBreak,
    num_flows: usize,
    /// Q[node * num_flows + flow]; destination entries stay pinned at 0.
    q: Vec<u64>,
    snapshot: Vec<u64>,
    pub injected: Vec<u64>,
    pub delivered: Vec<u64>,
    /// Cumulative served packets per link per flow.
    pub served: Vec<Vec<u64>>,
}

impl TraditionalEngine {
    pub fn new(
        network: Network,
        flows: Vec<FlowSpec>,
        tie_break: TieBreak,
    ) -> Result<Self, ModelError> {
        let topo = FlowTopology::build(&network, &flows)?;
        let num_flows = flows.len();
        let cells = network.num_nodes() * num_flows;
        let served = vec![vec![0; num_flows]; network.num_links()];
        Ok(TraditionalEngine {
            network,
            flows,
            topo,
            tie_break,
            num_flows,
            q: vec![0; cells],
            snapshot: vec![0; cells],
            injected: vec![0; num_flows],
            delivered: vec![0; num_flows],
            served,
        })
    }

    pub fn queue(&self, node: usize, flow: usize) -> u64 {
        self.q[node * self.num_flows + flow]
    }

    pub fn queues(&self) -> &[u64] {
        &self.q
    }

    pub fn total_backlog(&self) -> u64 {
        self.q.iter().sum()
    }

    pub fn topology(&self) -> &FlowTopology {
        &self.topo
    }

    /// Differential-backlog link weights: w = max over flows routed on the
    /// link of Q_tail - Q_head; links carried by no flow get no entry.
    pub fn weights(&self) -> LinkWeights {
        weights_from_queues(
            &self.network,
            &self.topo,
            &self.q,
            self.num_flows,
            self.tie_break,
        )
    }

    /// Advance one slot given this slot's external arrivals per flow.
    pub fn step(&mut self, arrivals: &[u64]) {
        assert_eq!(arrivals.len(), self.num_flows);
        let weights = self.weights();
        let schedule = max_weight_schedule(&self.network, &weights);
        self.snapshot.copy_from_slice(&self.q);
        let nf = self.num_flows;
        for idx in 0..self.network.num_links() {
            let rate = schedule.rates[idx];
            if rate == 0 {
                continue;
            }
            let f = schedule.selector[idx].unwrap() as usize;
            let link = self.network.link(idx);
            let moved = (rate as u64).min(self.snapshot[link.tail * nf + f]);
            if moved == 0 {
                continue;
            }
            self.q[link.tail * nf + f] -= moved;
            if link.head == self.flows[f].dest {
                self.delivered[f] += moved;
            } else {
                self.q[link.head * nf + f] += moved;
            }
            self.served[idx][f] += moved;
        }
        for (f, &a) in arrivals.iter().enumerate() {
            self.q[self.flows[f].source * nf + f] += a;
            self.injected[f] += a;
        }
    }
}

pub(crate) fn weights_from_queues(
    network: &Network,
    topo: &FlowTopology,
    q: &[u64],
    num_flows: usize,
    tie_break: TieBreak,
) -> LinkWeights {
    let entries = (0..network.num_links())
        .map(|idx| {
            let link = network.link(idx);
            let mut best: Option<(f64, u32)> = None;
            for &f in &topo.link_flows[idx] {
                let tail = q[link.tail * num_flows + f as usize] as f64;
                let head = q[link.head * num_flows + f as usize] as f64;
                let w = tail - head;
                match best {
                    Some((bw, _)) if !tie_break.replaces(w, bw) => {}
                    _ => best = Some((w, f)),
                }
            }
            best
        })
        .collect();
    LinkWeights::new(entries)
}
