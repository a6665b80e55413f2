//! Scheduling engines: traditional back-pressure, the shadow algorithm,
//! and min-resource adaptive routing.

mod minresource;
mod shadow;
mod traditional;

pub use minresource::MinResourceEngine;
pub use shadow::{Packet, ShadowEngine, ShadowParams, ShadowStepStats};
pub use traditional::TraditionalEngine;

use crate::net::{validate_route, FlowSpec, ModelError, Network};

/// Argmax tie-break between flows/destinations of equal weight. The
/// non-default variant exists as a negative control for the shadow /
/// traditional equivalence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestId,
    HighestId,
}

impl TieBreak {
    pub(crate) fn replaces(&self, cand: f64, best: f64) -> bool {
        match self {
            TieBreak::LowestId => cand > best,
            TieBreak::HighestId => cand >= best,
        }
    }
}

/// Route structure shared by the fixed-routing engines.
#[derive(Debug, Clone)]
pub struct FlowTopology {
    /// Per flow, the node sequence of its route.
    pub routes: Vec<Vec<usize>>,
    /// Per flow, the link sequence L(f).
    pub route_links: Vec<Vec<usize>>,
    /// Per link, the flows routed over it.
    pub link_flows: Vec<Vec<u32>>,
}

impl FlowTopology {
    pub fn build(network: &Network, flows: &[FlowSpec]) -> Result<Self, ModelError> {
        let mut routes = Vec::with_capacity(flows.len());
        let mut route_links = Vec::with_capacity(flows.len());
        let mut link_flows = vec![Vec::new(); network.num_links()];
        for (i, flow) in flows.iter().enumerate() {
            assert_eq!(flow.id as usize, i, "flows must be listed in id order");
            flow.validate(network)?;
            let links = validate_route(network, flow)?;
            for &l in &links {
                link_flows[l].push(flow.id);
            }
            routes.push(flow.route.clone().unwrap());
            route_links.push(links);
        }
        Ok(FlowTopology { routes, route_links, link_flows })
    }

    /// Maximum route length in hops over all flows.
    pub fn k_max(&self) -> usize {
        self.route_links.iter().map(Vec::len).max().unwrap_or(0)
    }
}
