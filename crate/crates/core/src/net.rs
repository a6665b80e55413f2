//! Network graph, flows, interference models, and schedule validity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traffic::UtilityKind;

/// Default per-link capacity bound (packets per slot).
pub const DEFAULT_C_MAX: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("self-loop link ({0},{0})")]
    SelfLoop(usize),
    #[error("duplicate link ({0},{1})")]
    DuplicateLink(usize, usize),
    #[error("link ({0},{1}) has a dangling endpoint (network has {2} nodes)")]
    DanglingEndpoint(usize, usize, usize),
    #[error("link ({0},{1}) capacity {2} outside [1, {3}]")]
    BadCapacity(usize, usize, u32, u32),
    #[error("flow {0}: source equals destination ({1})")]
    DegenerateFlow(u32, usize),
    #[error("flow {0}: route is missing")]
    MissingRoute(u32),
    #[error("flow {0}: route must start at the source and end at the destination")]
    RouteEndpoints(u32),
    #[error("flow {0}: no link from {1} to {2} on route")]
    MissingRouteLink(u32, usize, usize),
    #[error("flow {0}: route repeats node {1}")]
    RepeatedRouteNode(u32, usize),
    #[error("flow {0}: {1}")]
    BadTraffic(u32, String),
    #[error("invalid scenario: {0}")]
    BadScenario(String),
}

/// Interference model: which sets of links may be active together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interference {
    /// No interference: every link may be active every slot.
    None,
    /// One-hop (node-exclusive) interference: the active links must form a
    /// matching on the undirected support graph.
    NodeExclusive,
}

/// A directed link with an integer capacity in packets per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub tail: usize,
    pub head: usize,
    pub capacity: u32,
}

/// Validated network graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Network {
    num_nodes: usize,
    links: Vec<Link>,
    interference: Interference,
    c_max: u32,
    by_endpoints: HashMap<(usize, usize), usize>,
}

impl Network {
    pub fn build(
        num_nodes: usize,
        links: Vec<Link>,
        interference: Interference,
        c_max: u32,
    ) -> Result<Self, ModelError> {
        let mut by_endpoints = HashMap::with_capacity(links.len());
        for (idx, l) in links.iter().enumerate() {
            if l.tail == l.head {
                return Err(ModelError::SelfLoop(l.tail));
            }
            if l.tail >= num_nodes || l.head >= num_nodes {
                return Err(ModelError::DanglingEndpoint(l.tail, l.head, num_nodes));
            }
            if l.capacity < 1 || l.capacity > c_max {
                return Err(ModelError::BadCapacity(l.tail, l.head, l.capacity, c_max));
            }
            if by_endpoints.insert((l.tail, l.head), idx).is_some() {
                return Err(ModelError::DuplicateLink(l.tail, l.head));
            }
        }
        Ok(Network {
            num_nodes,
            links,
            interference,
            c_max,
            by_endpoints,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, idx: usize) -> Link {
        self.links[idx]
    }

    pub fn interference(&self) -> Interference {
        self.interference
    }

    pub fn c_max(&self) -> u32 {
        self.c_max
    }

    /// Index of the directed link tail -> head, if present.
    pub fn link_between(&self, tail: usize, head: usize) -> Option<usize> {
        self.by_endpoints.get(&(tail, head)).copied()
    }
}

/// Traffic model of a single flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrafficModel {
    Elastic { utility: UtilityKind, x_max: f64 },
    Inelastic { lambda: f64, epsilon: f64 },
}

/// A flow: source, destination, optional fixed route, traffic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub id: u32,
    pub source: usize,
    pub dest: usize,
    pub route: Option<Vec<usize>>,
    pub traffic: TrafficModel,
}

impl FlowSpec {
    pub fn validate(&self, network: &Network) -> Result<(), ModelError> {
        if self.source == self.dest {
            return Err(ModelError::DegenerateFlow(self.id, self.source));
        }
        match &self.traffic {
            TrafficModel::Elastic { utility, x_max } => {
                if *x_max <= 0.0 {
                    return Err(ModelError::BadTraffic(self.id, "x_max must be > 0".into()));
                }
                if let UtilityKind::AlphaFair { alpha } = utility {
                    if *alpha <= 0.0 {
                        return Err(ModelError::BadTraffic(self.id, "alpha must be > 0".into()));
                    }
                }
            }
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
        }
        if self.route.is_some() {
            validate_route(network, self)?;
        }
        Ok(())
    }
}

/// Resolve a flow's fixed route into the ordered list of link indices L(f).
pub fn validate_route(network: &Network, flow: &FlowSpec) -> Result<Vec<usize>, ModelError> {
    let route = flow.route.as_ref().ok_or(ModelError::MissingRoute(flow.id))?;
    if route.len() < 2
        || *route.first().unwrap() != flow.source
        || *route.last().unwrap() != flow.dest
    {
        return Err(ModelError::RouteEndpoints(flow.id));
    }
    let mut seen = vec![false; network.num_nodes()];
    let mut links = Vec::with_capacity(route.len() - 1);
    for (i, &n) in route.iter().enumerate() {
        if n >= network.num_nodes() {
            return Err(ModelError::DanglingEndpoint(n, n, network.num_nodes()));
        }
        if seen[n] {
            return Err(ModelError::RepeatedRouteNode(flow.id, n));
        }
        seen[n] = true;
        if i + 1 < route.len() {
            let m = route[i + 1];
            let l = network
                .link_between(n, m)
                .ok_or(ModelError::MissingRouteLink(flow.id, n, m))?;
            links.push(l);
        }
    }
    Ok(links)
}

/// A per-link service assignment: rate plus the flow/destination index that
/// attained the weight argmax on each active link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub rates: Vec<u32>,
    pub selector: Vec<Option<u32>>,
}

impl Schedule {
    pub fn zero(num_links: usize) -> Self {
        Schedule {
            rates: vec![0; num_links],
            selector: vec![None; num_links],
        }
    }

    /// Sum of rates weighted by the given per-link weights.
    pub fn objective(&self, weights: &[f64]) -> f64 {
        self.rates
            .iter()
            .zip(weights)
            .map(|(&r, &w)| r as f64 * w)
            .sum()
    }

    /// Bitmask of links with positive rate. Only valid for <= 64 links.
    pub fn active_mask(&self) -> u64 {
        let mut mask = 0u64;
        for (i, &r) in self.rates.iter().enumerate() {
            if r > 0 {
                mask |= 1 << i;
            }
        }
        mask
    }
}

/// True iff the schedule respects capacities and the interference model.
/// Total function: any rate vector can be checked.
pub fn is_valid_schedule(network: &Network, schedule: &Schedule) -> bool {
    if schedule.rates.len() != network.num_links() {
        return false;
    }
    for (idx, &rate) in schedule.rates.iter().enumerate() {
        if rate > network.link(idx).capacity {
            return false;
        }
    }
    match network.interference() {
        Interference::None => true,
        Interference::NodeExclusive => {
            let mut used = vec![false; network.num_nodes()];
            for (idx, &rate) in schedule.rates.iter().enumerate() {
                if rate == 0 {
                    continue;
                }
                let l = network.link(idx);
                if used[l.tail] || used[l.head] {
                    return false;
                }
                used[l.tail] = true;
                used[l.head] = true;
            }
            true
        }
    }
}
