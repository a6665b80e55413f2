//! Scenario runner: drives an engine for a fixed horizon with seeded
//! randomness, collects per-slot series and windowed averages, and provides
//! the trend statistics used by the stability checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::engine::{MinResourceEngine, ShadowEngine, ShadowParams, TieBreak, TraditionalEngine};
use crate::net::{FlowSpec, ModelError, Network, TrafficModel};
use crate::traffic::sample_poisson;

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("series needs at least 2 points in the window")]
    SeriesTooShort,
    #[error("window fraction must be in (0, 1]")]
    BadWindow,
    #[error("trace length mismatch ({0} vs {1})")]
    TraceLengthMismatch(usize, usize),
    #[error("hop profile requires a fixed-route flow")]
    NoFixedRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Traditional,
    Shadow,
    MinResource,
}

/// Engine-level parameters; per-flow traffic parameters (lambda, epsilon,
/// x_max) live in each flow's [`TrafficModel`].
#[derive(Debug, Clone, Copy)]
pub struct EngineParams {
    pub m: f64,
    pub beta: f64,
    pub tie_break: TieBreak,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams { m: 1000.0, beta: 0.99, tie_break: TieBreak::LowestId }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub flows: Vec<FlowSpec>,
    pub engine: EngineKind,
    pub params: EngineParams,
    pub slots: u64,
    pub warmup: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.slots > 0 && self.warmup >= self.slots {
            return Err(ModelError::BadScenario(
                "warmup must be < slots".into(),
            ));
        }
        if self.slots == 0 && self.warmup != 0 {
            return Err(ModelError::BadScenario("warmup must be 0 when slots is 0".into()));
        }
        for flow in &self.flows {
            match self.engine {
                EngineKind::MinResource => flow.validate_endpoints_only(&self.network)?,
                _ => {
                    flow.validate(&self.network)?;
                    if flow.route.is_none() {
                        return Err(ModelError::MissingRoute(flow.id));
                    }
                }
            }
            if self.engine == EngineKind::Traditional {
                if matches!(flow.traffic, TrafficModel::Elastic { .. }) {
                    return Err(ModelError::BadScenario(
                        "the traditional engine does not run congestion control".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Metrics of one run. Counters are per "selector": the flow id on the
/// fixed-routing engines, the destination index on the min-resource engine.
/// Windowed averages cover [warmup, slots).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLog {
    pub slots: u64,
    pub warmup: u64,
    pub num_nodes: usize,
    pub num_selectors: usize,
    /// End-of-slot totals.
    pub shadow_total: Vec<u64>,
    pub real_total: Vec<u64>,
    /// Time-averaged queue per (node, selector), flattened row-major.
    pub avg_queue: Vec<f64>,
    /// Time-averaged real FIFO length per link (shadow engine only).
    pub avg_fifo: Vec<f64>,
    /// Served packets per slot per (link, selector) over the window.
    pub allocation: Vec<Vec<f64>>,
    /// Full-run conservation counters, per selector.
    pub injected_shadow: Vec<u64>,
    pub injected_real: Vec<u64>,
    pub delivered_shadow: Vec<u64>,
    pub delivered_real: Vec<u64>,
    pub queued_shadow_final: Vec<u64>,
    pub queued_real_final: Vec<u64>,
    /// Mean shadow arrivals per slot per selector over the window (the
    /// measured injection rate x-bar on the shadow engine).
    pub mean_shadow_rate: Vec<f64>,
    /// Delivery latency (slots) averaged over window deliveries.
    pub mean_latency: f64,
    pub mean_real_throughput: f64,
    pub mean_real_backlog: f64,
    pub mean_shadow_backlog: f64,
}

impl MetricsLog {
    pub fn avg_queue_at(&self, node: usize, selector: usize) -> f64 {
        self.avg_queue[node * self.num_selectors + selector]
    }

    fn empty(num_nodes: usize, num_selectors: usize, num_links: usize) -> Self {
        MetricsLog {
            slots: 0,
            warmup: 0,
            num_nodes,
            num_selectors,
            shadow_total: Vec::new(),
            real_total: Vec::new(),
            avg_queue: vec![0.0; num_nodes * num_selectors],
            avg_fifo: vec![0.0; num_links],
            allocation: vec![vec![0.0; num_selectors]; num_links],
            injected_shadow: vec![0; num_selectors],
            injected_real: vec![0; num_selectors],
            delivered_shadow: vec![0; num_selectors],
            delivered_real: vec![0; num_selectors],
            queued_shadow_final: vec![0; num_selectors],
            queued_real_final: vec![0; num_selectors],
            mean_shadow_rate: vec![0.0; num_selectors],
            mean_latency: 0.0,
            mean_real_throughput: 0.0,
            mean_real_backlog: 0.0,
            mean_shadow_backlog: 0.0,
        }
    }
}

/// Deterministic run: identical scenario (including seed) gives a
/// bit-identical log.
pub fn run(scenario: &Scenario) -> Result<MetricsLog, ModelError> {
    scenario.validate()?;
    match scenario.engine {
        EngineKind::Traditional => run_traditional(scenario),
        EngineKind::Shadow => run_shadow(scenario, None),
        EngineKind::MinResource => run_minresource(scenario),
    }
}

fn inelastic_lambda(flow: &FlowSpec) -> f64 {
    match flow.traffic {
        TrafficModel::Inelastic { lambda, .. } => lambda,
        TrafficModel::Elastic { .. } => unreachable!("validated inelastic"),
    }
}

fn run_traditional(scenario: &Scenario) -> Result<MetricsLog, ModelError> {
    let nf = scenario.flows.len();
    let nl = scenario.network.num_links();
    let mut engine = TraditionalEngine::new(
        scenario.network.clone(),
        scenario.flows.clone(),
        scenario.params.tie_break,
    )?;
    let mut log = MetricsLog::empty(scenario.network.num_nodes(), nf, nl);
    log.slots = scenario.slots;
    log.warmup = scenario.warmup;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let lambdas: Vec<f64> = scenario.flows.iter().map(inelastic_lambda).collect();
    let mut arrivals = vec![0u64; nf];
    let mut qsum = vec![0u128; scenario.network.num_nodes() * nf];
    let mut arrivals_window = vec![0u64; nf];
    let mut served_at_warmup: Vec<Vec<u64>> = Vec::new();
    log.shadow_total.reserve(scenario.slots as usize);
    for t in 0..scenario.slots {
        if t == scenario.warmup {
            served_at_warmup = engine.served.clone();
        }
        for f in 0..nf {
            arrivals[f] = sample_poisson(lambdas[f], &mut rng);
        }
        engine.step(&arrivals);
        log.shadow_total.push(0);
        log.real_total.push(engine.total_backlog());
        if t >= scenario.warmup {
            for (acc, &v) in qsum.iter_mut().zip(engine.queues()) {
                *acc += v as u128;
            }
            for f in 0..nf {
                arrivals_window[f] += arrivals[f];
            }
        }
    }
    finalize_queue_averages(&mut log, &qsum, scenario);
    finalize_allocation(&mut log, &engine.served, &served_at_warmup, scenario);
    let window = window_len(scenario);
    for f in 0..nf {
        log.injected_real[f] = engine.injected[f];
        log.delivered_real[f] = engine.delivered[f];
        log.queued_real_final[f] = (0..scenario.network.num_nodes())
            .map(|n| engine.queue(n, f))
            .sum();
        log.mean_shadow_rate[f] = arrivals_window[f] as f64 / window;
    }
    log.mean_real_backlog = mean_tail(&log.real_total, scenario.warmup);
    Ok(log)
}

fn run_minresource(scenario: &Scenario) -> Result<MetricsLog, ModelError> {
    let nf = scenario.flows.len();
    let nl = scenario.network.num_links();
    let mut engine = MinResourceEngine::new(
        scenario.network.clone(),
        scenario.flows.clone(),
        scenario.params.m,
        scenario.params.tie_break,
    )?;
    let nd = engine.dests().len();
    let mut log = MetricsLog::empty(scenario.network.num_nodes(), nd, nl);
    log.slots = scenario.slots;
    log.warmup = scenario.warmup;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let lambdas: Vec<f64> = scenario.flows.iter().map(inelastic_lambda).collect();
    let mut arrivals = vec![0u64; nf];
    let mut qsum = vec![0u128; scenario.network.num_nodes() * nd];
    let mut arrivals_window = vec![0u64; nd];
    let mut served_at_warmup: Vec<Vec<u64>> = Vec::new();
    for t in 0..scenario.slots {
        if t == scenario.warmup {
            served_at_warmup = engine.served.clone();
        }
        for f in 0..nf {
            arrivals[f] = sample_poisson(lambdas[f], &mut rng);
        }
        engine.step(&arrivals);
        log.shadow_total.push(0);
        log.real_total.push(engine.total_backlog());
        if t >= scenario.warmup {
            for (acc, &v) in qsum.iter_mut().zip(engine.queues()) {
                *acc += v as u128;
            }
            for f in 0..nf {
                arrivals_window[engine.dest_of_flow(f)] += arrivals[f];
            }
        }
    }
    finalize_queue_averages(&mut log, &qsum, scenario);
    finalize_allocation(&mut log, &engine.served, &served_at_warmup, scenario);
    let window = window_len(scenario);
    for d in 0..nd {
        log.injected_real[d] = engine.injected[d];
        log.delivered_real[d] = engine.delivered[d];
        log.queued_real_final[d] = (0..scenario.network.num_nodes())
            .map(|n| engine.queue(n, d))
            .sum();
        log.mean_shadow_rate[d] = arrivals_window[d] as f64 / window;
    }
    log.mean_real_backlog = mean_tail(&log.real_total, scenario.warmup);
    Ok(log)
}

fn run_shadow(
    scenario: &Scenario,
    mut trace: Option<&mut ShadowTrace>,
) -> Result<MetricsLog, ModelError> {
    let nf = scenario.flows.len();
    let nl = scenario.network.num_links();
    let mut engine = ShadowEngine::new(
        scenario.network.clone(),
        scenario.flows.clone(),
        ShadowParams { m: scenario.params.m, beta: scenario.params.beta },
        scenario.params.tie_break,
    )?;
    let mut log = MetricsLog::empty(scenario.network.num_nodes(), nf, nl);
    log.slots = scenario.slots;
    log.warmup = scenario.warmup;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut qsum = vec![0u128; scenario.network.num_nodes() * nf];
    let mut fifosum = vec![0u128; nl];
    let mut arrivals_window = vec![0u64; nf];
    let mut latency_sum = 0u64;
    let mut delivered_window = 0u64;
    let mut served_at_warmup: Vec<Vec<u64>> = Vec::new();
    for t in 0..scenario.slots {
        if t == scenario.warmup {
            served_at_warmup = engine.served_real.clone();
        }
        let stats = engine.step(t, &mut rng);
        if let Some(tr) = trace.as_deref_mut() {
            tr.counters.push(engine.counters().to_vec());
            tr.shadow_arrivals.push(engine.last_shadow_arrivals.clone());
        }
        log.shadow_total.push(engine.total_shadow());
        log.real_total.push(engine.total_real());
        if t >= scenario.warmup {
            for (acc, &v) in qsum.iter_mut().zip(engine.counters()) {
                *acc += v as u128;
            }
            for l in 0..nl {
                fifosum[l] += engine.fifo_len(l) as u128;
            }
            for f in 0..nf {
                arrivals_window[f] += engine.last_shadow_arrivals[f];
            }
            latency_sum += stats.latency_sum;
            delivered_window += stats.delivered_real;
        }
    }
    finalize_queue_averages(&mut log, &qsum, scenario);
    finalize_allocation(&mut log, &engine.served_real, &served_at_warmup, scenario);
    let window = window_len(scenario);
    for l in 0..nl {
        log.avg_fifo[l] = fifosum[l] as f64 / window;
    }
    for f in 0..nf {
        log.injected_shadow[f] = engine.injected_shadow[f];
        log.injected_real[f] = engine.injected_real[f];
        log.delivered_shadow[f] = engine.delivered_shadow[f];
        log.delivered_real[f] = engine.delivered_real[f];
        log.queued_shadow_final[f] = (0..scenario.network.num_nodes())
            .map(|n| engine.counter(n, f))
            .sum();
        log.queued_real_final[f] = engine.injected_real[f] - engine.delivered_real[f];
        log.mean_shadow_rate[f] = arrivals_window[f] as f64 / window;
    }
    if delivered_window > 0 {
        log.mean_latency = latency_sum as f64 / delivered_window as f64;
    }
    log.mean_real_throughput = delivered_window as f64 / window;
    log.mean_real_backlog = mean_tail(&log.real_total, scenario.warmup);
    log.mean_shadow_backlog = mean_tail(&log.shadow_total, scenario.warmup);
    Ok(log)
}

fn window_len(scenario: &Scenario) -> f64 {
    (scenario.slots.saturating_sub(scenario.warmup)).max(1) as f64
}

fn finalize_queue_averages(log: &mut MetricsLog, qsum: &[u128], scenario: &Scenario) {
    let window = window_len(scenario);
    for (avg, &sum) in log.avg_queue.iter_mut().zip(qsum) {
        *avg = sum as f64 / window;
    }
}

fn finalize_allocation(
    log: &mut MetricsLog,
    served: &[Vec<u64>],
    served_at_warmup: &[Vec<u64>],
    scenario: &Scenario,
) {
    let window = window_len(scenario);
    for (l, row) in served.iter().enumerate() {
        for (s, &count) in row.iter().enumerate() {
            let base = served_at_warmup
                .get(l)
                .and_then(|r| r.get(s))
                .copied()
                .unwrap_or(0);
            log.allocation[l][s] = (count - base) as f64 / window;
        }
    }
}

fn mean_tail(series: &[u64], warmup: u64) -> f64 {
    let tail = &series[warmup.min(series.len() as u64) as usize..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter().map(|&v| v as f64).sum::<f64>() / tail.len() as f64
}

/// Ordinary least squares y = a + b x on the given points; returns the
/// slope and the half-width of its 95% confidence interval.
pub fn least_squares_ci(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    if points.len() < 3 {
        return (slope, f64::INFINITY);
    }
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let df = n - 2.0;
    let se = (sse / df / sxx).sqrt();
    if se == 0.0 {
        return (slope, 0.0);
    }
    let t = StudentsT::new(0.0, 1.0, df)
        .expect("valid t distribution")
        .inverse_cdf(0.975);
    (slope, t * se)
}

/// Least-squares slope of the trailing `window` fraction of a series, with
/// its 95% confidence half-width.
pub fn trend_slope(series: &[u64], window: f64) -> Result<(f64, f64), HarnessError> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(HarnessError::BadWindow);
    }
    let take = ((series.len() as f64 * window).ceil() as usize).min(series.len());
    if take < 2 {
        return Err(HarnessError::SeriesTooShort);
    }
    let tail = &series[series.len() - take..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64, v as f64))
        .collect();
    Ok(least_squares_ci(&points))
}

/// Slope test robust to the strong autocorrelation of queue series: the
/// trailing half is reduced to `batches` batch means before the OLS fit.
pub fn stability_slope(series: &[u64], batches: usize) -> Result<(f64, f64), HarnessError> {
    let tail = &series[series.len() / 2..];
    if tail.len() < batches * 2 || batches < 3 {
        return Err(HarnessError::SeriesTooShort);
    }
    let batch_len = tail.len() / batches;
    let points: Vec<(f64, f64)> = (0..batches)
        .map(|b| {
            let chunk = &tail[b * batch_len..(b + 1) * batch_len];
            let mean = chunk.iter().map(|&v| v as f64).sum::<f64>() / chunk.len() as f64;
            // x in units of slots so the slope is per-slot drift
            ((b * batch_len) as f64 + batch_len as f64 / 2.0, mean)
        })
        .collect();
    Ok(least_squares_ci(&points))
}

/// Time-averaged queue of a fixed-route flow per hop, ordered from the node
/// nearest the destination back to the source.
pub fn hop_profile(
    log: &MetricsLog,
    scenario: &Scenario,
    flow_id: usize,
) -> Result<Vec<f64>, HarnessError> {
    if scenario.engine == EngineKind::MinResource {
        return Err(HarnessError::NoFixedRoute);
    }
    let route = scenario.flows[flow_id]
        .route
        .as_ref()
        .ok_or(HarnessError::NoFixedRoute)?;
    Ok(route[..route.len() - 1]
        .iter()
        .rev()
        .map(|&n| log.avg_queue_at(n, flow_id))
        .collect())
}

/// Per-slot shadow-engine trace: counter snapshots and shadow arrivals.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ShadowTrace {
    pub counters: Vec<Vec<u64>>,
    pub shadow_arrivals: Vec<Vec<u64>>,
}

/// Run the shadow engine and capture its per-slot trace.
pub fn shadow_trace(scenario: &Scenario) -> Result<ShadowTrace, ModelError> {
    let mut trace = ShadowTrace::default();
    run_shadow(scenario, Some(&mut trace))?;
    Ok(trace)
}

/// Replay recorded arrival sequences through the traditional engine and
/// capture its per-slot queue snapshots.
pub fn traditional_trace(
    scenario: &Scenario,
    arrivals: &[Vec<u64>],
    tie_break: TieBreak,
) -> Result<Vec<Vec<u64>>, ModelError> {
    let mut engine = TraditionalEngine::new(
        scenario.network.clone(),
        scenario.flows.clone(),
        tie_break,
    )?;
    let mut out = Vec::with_capacity(arrivals.len());
    for a in arrivals {
        engine.step(a);
        out.push(engine.queues().to_vec());
    }
    Ok(out)
}

/// True iff the two per-slot queue traces are identical: the shadow
/// counters evolve exactly like traditional back-pressure run on the
/// shadow packet stream.
pub fn shadow_equivalence_check(
    shadow_counters: &[Vec<u64>],
    traditional_queues: &[Vec<u64>],
) -> Result<bool, HarnessError> {
    if shadow_counters.len() != traditional_queues.len() {
        return Err(HarnessError::TraceLengthMismatch(
            shadow_counters.len(),
            traditional_queues.len(),
        ));
    }
    Ok(shadow_counters == traditional_queues)
}
