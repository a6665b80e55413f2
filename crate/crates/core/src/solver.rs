//! Per-slot max-weight schedule solver.
//!
//! Maximizes sum over links of rate * weight over the set of valid
//! schedules. With fixed per-link capacities the maximizer activates links
//! all-or-nothing at full capacity, so under node-exclusive interference
//! the problem reduces to an exact maximum-weight matching with matching
//! weight capacity * weight, restricted to links of positive weight.

use std::collections::HashMap;

use thiserror::Error;

use crate::net::{is_valid_schedule, Interference, Network, Schedule};

/// Per-link weight and the flow/destination index attaining the argmax.
/// `None` entries mark links carried by no flow; they are never scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkWeights {
    entries: Vec<Option<(f64, u32)>>,
}

impl LinkWeights {
    pub fn new(entries: Vec<Option<(f64, u32)>>) -> Self {
        debug_assert!(entries
            .iter()
            .flatten()
            .all(|(w, _)| w.is_finite()));
        LinkWeights { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, link: usize) -> Option<(f64, u32)> {
        self.entries[link]
    }

    pub fn weight(&self, link: usize) -> f64 {
        self.entries[link].map(|(w, _)| w).unwrap_or(f64::NEG_INFINITY)
    }

    /// Weights as a dense vector, 0 for carrier-less links (they are never
    /// active, so this is safe to use in objective computations).
    pub fn dense(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.map(|(w, _)| w).unwrap_or(0.0))
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("brute-force oracle limited to {limit} links, got {got}")]
    TooLarge { limit: usize, got: usize },
}

const BRUTE_FORCE_LIMIT: usize = 24;

/// Compare two active-link index sets for the deterministic tie-break:
/// returns true if `a` is lexicographically smaller than `b` when both are
/// read as ascending index sequences (a proper prefix is smaller).
pub(crate) fn lex_smaller(a: u64, b: u64) -> bool {
    if a == b {
        return false;
    }
    let diff = a ^ b;
    let i = diff.trailing_zeros();
    if a & (1 << i) != 0 {
        // `a` owns the lowest differing index; it is smaller unless `b` is a
        // proper prefix (no further elements at all).
        b >> i != 0
    } else {
        a >> i == 0
    }
}

/// Exact max-weight schedule over the valid-schedule set.
///
/// Links with weight <= 0 are never activated (zeroing them never lowers the
/// objective; ties break toward inactivity). Under no interference every
/// positive-weight link is served at capacity. Under node-exclusive
/// interference an exact maximum-weight matching is computed; ties between
/// equal-objective schedules break toward the lexicographically smallest
/// active-link index set.
pub fn max_weight_schedule(network: &Network, weights: &LinkWeights) -> Schedule {
    assert_eq!(weights.len(), network.num_links());
    let mut schedule = Schedule::zero(network.num_links());
    match network.interference() {
        Interference::None => {
            for idx in 0..network.num_links() {
                if let Some((w, sel)) = weights.get(idx) {
                    if w > 0.0 {
                        schedule.rates[idx] = network.link(idx).capacity;
                        schedule.selector[idx] = Some(sel);
                    }
                }
            }
        }
        Interference::NodeExclusive => {
            let mask = matching_active_set(network, weights);
            for idx in 0..network.num_links() {
                if mask & (1 << idx) != 0 {
                    let (_, sel) = weights.get(idx).unwrap();
                    schedule.rates[idx] = network.link(idx).capacity;
                    schedule.selector[idx] = Some(sel);
                }
            }
        }
    }
    debug_assert!(is_valid_schedule(network, &schedule));
    schedule
}

/// Maximum-weight matching over positive-weight links, as a link bitmask.
///
/// Memoized recursion over the set of still-available nodes, processing the
/// lowest available node first. Exact for any graph; the memo stays small on
/// low-bandwidth graphs (chains, grids, the diamond network) because only
/// a sliding window of nodes can be undecided at once.
fn matching_active_set(network: &Network, weights: &LinkWeights) -> u64 {
    assert!(
        network.num_links() <= 64,
        "node-exclusive solver supports at most 64 links"
    );
    // Candidate links and the nodes they touch.
    let mut node_map: HashMap<usize, u32> = HashMap::new();
    let mut cands: Vec<(usize, u32, u32, f64)> = Vec::new(); // (link, a, b, value)
    for idx in 0..network.num_links() {
        if let Some((w, _)) = weights.get(idx) {
            if w > 0.0 {
                let l = network.link(idx);
                let next = node_map.len() as u32;
                let a = *node_map.entry(l.tail).or_insert(next);
                let next = node_map.len() as u32;
                let b = *node_map.entry(l.head).or_insert(next);
                cands.push((idx, a, b, l.capacity as f64 * w));
            }
        }
    }
    let n = node_map.len();
    assert!(n <= 64, "node-exclusive solver supports at most 64 active nodes");
    if cands.is_empty() {
        return 0;
    }
    // Adjacency by local node id.
    let mut adj: Vec<Vec<(usize, u32, f64)>> = vec![Vec::new(); n];
    for &(link, a, b, val) in &cands {
        adj[a as usize].push((link, b, val));
        adj[b as usize].push((link, a, val));
    }
    for lst in &mut adj {
        lst.sort_by_key(|&(link, _, _)| link);
    }
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut memo: HashMap<u64, (f64, u64)> = HashMap::new();
    solve_matching(full, &adj, &mut memo).1
}

fn solve_matching(
    avail: u64,
    adj: &[Vec<(usize, u32, f64)>],
    memo: &mut HashMap<u64, (f64, u64)>,
) -> (f64, u64) {
    if avail == 0 {
        return (0.0, 0);
    }
    if let Some(&hit) = memo.get(&avail) {
        return hit;
    }
    let n = avail.trailing_zeros() as usize;
    let rest = avail & !(1u64 << n);
    // Option: leave node n unmatched.
    let mut best = solve_matching(rest, adj, memo);
    for &(link, m, val) in &adj[n] {
        if rest & (1u64 << m) == 0 {
            continue;
        }
        let (sub_val, sub_mask) = solve_matching(rest & !(1u64 << m), adj, memo);
        let cand = (sub_val + val, sub_mask | (1u64 << link));
        if cand.0 > best.0 || (cand.0 == best.0 && lex_smaller(cand.1, best.1)) {
            best = cand;
        }
    }
    memo.insert(avail, best);
    best
}

/// Exhaustive testing oracle: enumerate all link subsets, keep valid
/// schedules, return the objective-maximal one under the same tie-break as
/// [`max_weight_schedule`].
pub fn brute_force_max_weight(
    network: &Network,
    weights: &LinkWeights,
) -> Result<Schedule, SolverError> {
    let n = network.num_links();
    if n > BRUTE_FORCE_LIMIT {
        return Err(SolverError::TooLarge { limit: BRUTE_FORCE_LIMIT, got: n });
    }
    let dense = weights.dense();
    let carried: Vec<bool> = (0..n).map(|i| weights.get(i).is_some()).collect();
    // Local node ids so node usage fits a u64 (<= 48 endpoints for 24 links).
    let mut node_map: HashMap<usize, u32> = HashMap::new();
    let mut link_nodes: Vec<u64> = Vec::with_capacity(n);
    let mut link_vals: Vec<f64> = Vec::with_capacity(n);
    for idx in 0..n {
        let l = network.link(idx);
        let next = node_map.len() as u32;
        let a = *node_map.entry(l.tail).or_insert(next);
        let next = node_map.len() as u32;
        let b = *node_map.entry(l.head).or_insert(next);
        link_nodes.push((1u64 << a) | (1u64 << b));
        link_vals.push(l.capacity as f64 * dense[idx]);
    }
    let node_exclusive = network.interference() == Interference::NodeExclusive;
    let mut best_mask = 0u64;
    let mut best_val = 0.0f64;
    'subsets: for mask in 0u64..(1u64 << n) {
        let mut val = 0.0;
        let mut used = 0u64;
        let mut bits = mask;
        while bits != 0 {
            let idx = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if !carried[idx] || dense[idx] <= 0.0 {
                continue 'subsets; // only positive-weight links may be active
            }
            if node_exclusive {
                if used & link_nodes[idx] != 0 {
                    continue 'subsets; // not a matching
                }
                used |= link_nodes[idx];
            }
            val += link_vals[idx];
        }
        if val > best_val || (val == best_val && lex_smaller(mask, best_mask)) {
            best_val = val;
            best_mask = mask;
        }
    }
    Ok(mask_to_schedule(network, weights, best_mask))
}

fn mask_to_schedule(network: &Network, weights: &LinkWeights, mask: u64) -> Schedule {
    let mut s = Schedule::zero(network.num_links());
    for idx in 0..network.num_links() {
        if mask & (1 << idx) != 0 {
            s.rates[idx] = network.link(idx).capacity;
            s.selector[idx] = weights.get(idx).map(|(_, sel)| sel);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Interference, Link, Network};
    use crate::scenarios;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weights_from(v: &[f64]) -> LinkWeights {
        LinkWeights::new(v.iter().map(|&w| Some((w, 0))).collect())
    }

    #[test]
    fn all_zero_weights_give_empty_schedule() {
        let (net, _) = scenarios::diamond8(5.0);
        let w = weights_from(&vec![0.0; net.num_links()]);
        let s = max_weight_schedule(&net, &w);
        assert!(s.rates.iter().all(|&r| r == 0));
    }

    #[test]
    fn diamond_two_disjoint_links() {
        let (net, _) = scenarios::diamond8(5.0);
        let mut w = vec![0.0; net.num_links()];
        w[net.link_between(3, 4).unwrap()] = 5.0;
        w[net.link_between(1, 6).unwrap()] = 5.0;
        let lw = weights_from(&w);
        let s = max_weight_schedule(&net, &lw);
        assert_eq!(s.objective(&lw.dense()), 100.0);
        assert_eq!(s.rates[net.link_between(3, 4).unwrap()], 10);
        assert_eq!(s.rates[net.link_between(1, 6).unwrap()], 10);
        assert_eq!(s.rates.iter().filter(|&&r| r > 0).count(), 2);
        // Matches the exhaustive enumeration.
        let oracle = brute_force_max_weight(&net, &lw).unwrap();
        assert_eq!(oracle.active_mask(), s.active_mask());
    }

    #[test]
    fn no_interference_takes_positive_weights_only() {
        let net = Network::build(
            4,
            vec![
                Link { tail: 0, head: 1, capacity: 10 },
                Link { tail: 1, head: 2, capacity: 10 },
                Link { tail: 2, head: 3, capacity: 10 },
            ],
            Interference::None,
            10,
        )
        .unwrap();
        let s = max_weight_schedule(&net, &weights_from(&[3.0, -2.0, 0.0]));
        assert_eq!(s.rates, vec![10, 0, 0]);
    }

    #[test]
    fn one_link_network_matches_oracle() {
        let net = Network::build(
            2,
            vec![Link { tail: 0, head: 1, capacity: 5 }],
            Interference::NodeExclusive,
            10,
        )
        .unwrap();
        for w in [-1.0, 0.0, 2.5] {
            let lw = weights_from(&[w]);
            let a = max_weight_schedule(&net, &lw);
            let b = brute_force_max_weight(&net, &lw).unwrap();
            assert_eq!(a, b);
        }
    }

    fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> LinkWeights {
        // Quarter-integer weights keep objective sums exact in f64.
        LinkWeights::new(
            (0..n)
                .map(|i| {
                    if rng.gen_bool(0.1) {
                        None
                    } else {
                        Some((rng.gen_range(-20..80) as f64 / 4.0, i as u32))
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn diamond_random_weights_match_oracle() {
        let (net, _) = scenarios::diamond8(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let lw = random_weights(&mut rng, net.num_links());
            let fast = max_weight_schedule(&net, &lw);
            let slow = brute_force_max_weight(&net, &lw).unwrap();
            assert_eq!(fast.objective(&lw.dense()), slow.objective(&lw.dense()));
        }
    }

    #[test]
    fn grid16_single_slot_matches_oracle() {
        let (net, _) = scenarios::grid16();
        assert_eq!(net.num_links(), 24);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let lw = random_weights(&mut rng, net.num_links());
            let fast = max_weight_schedule(&net, &lw);
            let slow = brute_force_max_weight(&net, &lw).unwrap();
            assert_eq!(fast.objective(&lw.dense()), slow.objective(&lw.dense()));
        }
    }

    #[test]
    fn scale_invariance_of_active_set() {
        let (net, _) = scenarios::diamond8(5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let base: Vec<Option<(f64, u32)>> = (0..net.num_links())
                .map(|i| Some((rng.gen_range(-5..15) as f64, i as u32)))
                .collect();
            let lw = LinkWeights::new(base.clone());
            let scaled = LinkWeights::new(
                base.iter()
                    .map(|e| e.map(|(w, s)| (w * 4.0, s)))
                    .collect(),
            );
            let a = max_weight_schedule(&net, &lw);
            let b = max_weight_schedule(&net, &scaled);
            assert_eq!(a.active_mask(), b.active_mask());
        }
    }

    #[test]
    fn nonpositive_weights_never_active() {
        let (net, _) = scenarios::grid16();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let lw = random_weights(&mut rng, net.num_links());
            let s = max_weight_schedule(&net, &lw);
            for idx in 0..net.num_links() {
                if s.rates[idx] > 0 {
                    assert!(lw.weight(idx) > 0.0);
                }
            }
            assert!(is_valid_schedule(&net, &s));
        }
    }

    #[test]
    fn brute_force_size_limit() {
        let net = scenarios::linear_network(30, 10);
        let lw = weights_from(&vec![1.0; 30]);
        assert_eq!(
            brute_force_max_weight(&net, &lw).unwrap_err(),
            SolverError::TooLarge { limit: 24, got: 30 }
        );
    }

    #[test]
    fn lex_order_rules() {
        // {0,5} < {1,2}; {} < {3}; {0} < {0,5}
        assert!(lex_smaller(0b100001, 0b110));
        assert!(lex_smaller(0, 0b1000));
        assert!(lex_smaller(0b1, 0b100001));
        assert!(!lex_smaller(0b100001, 0b1));
    }
}
