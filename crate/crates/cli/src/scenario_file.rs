//! On-disk scenario format: a TOML document that fully determines one run.
//!
//! Grammar (all keys shown; optional keys marked with their defaults):
//!
//! ```toml
//! [network]
//! nodes = 5
//! interference = "none"          # "none" | "node_exclusive"
//! c_max = 10                     # optional, default 10
//! links = [[0, 1, 10], [1, 2, 10]]   # [tail, head, capacity]
//!
//! [[flows]]
//! id = 0
//! source = 0
//! dest = 4
//! route = [0, 1, 2, 3, 4]        # optional; required except for min_resource
//! [flows.traffic]
//! kind = "inelastic"             # "inelastic" | "elastic"
//! lambda = 5.0                   # inelastic only
//! epsilon = 0.0                  # inelastic only, default 0
//! utility = "log"                # elastic only: "log" | "alpha_fair"
//! alpha = 2.0                    # elastic + alpha_fair only
//! x_max = 20.0                   # elastic only
//!
//! [engine]
//! kind = "shadow"                # "traditional" | "shadow" | "min_resource"
//! m = 1000.0                     # optional, default 1000
//! beta = 0.99                    # optional, default 0.99
//!
//! [run]
//! slots = 200000
//! warmup = 100000                # optional, default slots / 2
//! seed = 1                       # optional, default 1
//! ```
//!
//! Unknown keys are rejected. A parsed file re-serialized with
//! [`ScenarioFile::from_scenario`] parses back to the same scenario.

use bp_core::net::{FlowSpec, Interference, Link, Network, TrafficModel};
use bp_core::{EngineKind, EngineParams, Scenario, UtilityKind};
use serde::{Deserialize, Serialize};

/// CLI-level failure, carrying the process exit code contract:
/// parse / usage errors exit 2, model invariant violations exit 3.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Invariant(m) => m,
        }
    }
}

impl From<bp_core::ModelError> for CliError {
    fn from(e: bp_core::ModelError) -> Self {
        CliError::Invariant(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub network: NetworkSection,
    pub flows: Vec<FlowSection>,
    pub engine: EngineSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub nodes: usize,
    pub interference: Interference,
    #[serde(default = "default_c_max")]
    pub c_max: u32,
    pub links: Vec<(usize, usize, u32)>,
}

fn default_c_max() -> u32 {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub id: u32,
    pub source: usize,
    pub dest: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<Vec<usize>>,
    pub traffic: TrafficSection,
}

/// Flattened traffic description; which keys are meaningful depends on
/// `kind`, and keys belonging to the other kind are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub kind: EngineKind,
    #[serde(default = "default_m")]
    pub m: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_m() -> f64 {
    1000.0
}

fn default_beta() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub slots: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    1
}

impl TrafficSection {
    fn to_model(&self, flow_id: u32) -> Result<TrafficModel, CliError> {
        let bad = |msg: String| Err(CliError::Parse(format!("flow {flow_id}: {msg}")));
        match self.kind.as_str() {
            "inelastic" => {
                if self.utility.is_some() || self.alpha.is_some() || self.x_max.is_some() {
                    return bad("inelastic traffic takes only lambda and epsilon".into());
                }
                let Some(lambda) = self.lambda else {
                    return bad("inelastic traffic requires lambda".into());
                };
                Ok(TrafficModel::Inelastic { lambda, epsilon: self.epsilon.unwrap_or(0.0) })
            }
            "elastic" => {
                if self.lambda.is_some() || self.epsilon.is_some() {
                    return bad("elastic traffic takes utility/alpha/x_max, not lambda".into());
                }
                let Some(x_max) = self.x_max else {
                    return bad("elastic traffic requires x_max".into());
                };
                let utility = match self.utility.as_deref() {
                    Some("log") | None => {
                        if self.alpha.is_some() {
                            return bad("alpha is only valid with utility = \"alpha_fair\"".into());
                        }
                        UtilityKind::Log
                    }
                    Some("alpha_fair") => {
                        let Some(alpha) = self.alpha else {
                            return bad("alpha_fair utility requires alpha".into());
                        };
                        UtilityKind::AlphaFair { alpha }
                    }
                    Some(other) => return bad(format!("unknown utility \"{other}\"")),
                };
                Ok(TrafficModel::Elastic { utility, x_max })
            }
            other => bad(format!("unknown traffic kind \"{other}\"")),
        }
    }

    fn from_model(model: &TrafficModel) -> Self {
        match model {
            TrafficModel::Inelastic { lambda, epsilon } => TrafficSection {
                kind: "inelastic".into(),
                lambda: Some(*lambda),
                epsilon: Some(*epsilon),
                utility: None,
                alpha: None,
                x_max: None,
            },
            TrafficModel::Elastic { utility, x_max } => {
                let (utility, alpha) = match utility {
                    UtilityKind::Log => ("log".to_string(), None),
                    UtilityKind::AlphaFair { alpha } => ("alpha_fair".to_string(), Some(*alpha)),
                };
                TrafficSection {
                    kind: "elastic".into(),
                    lambda: None,
                    epsilon: None,
                    utility: Some(utility),
                    alpha,
                    x_max: Some(*x_max),
                }
            }
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(format!("scenario parse error: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario files always serialize")
    }

    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let links = self
            .network
            .links
            .iter()
            .map(|&(tail, head, capacity)| Link { tail, head, capacity })
            .collect();
        let network = Network::build(
            self.network.nodes,
            links,
            self.network.interference,
            self.network.c_max,
        )?;
        let mut flows = Vec::with_capacity(self.flows.len());
        for f in &self.flows {
            flows.push(FlowSpec {
                id: f.id,
                source: f.source,
                dest: f.dest,
                route: f.route.clone(),
                traffic: f.traffic.to_model(f.id)?,
            });
        }
        let scenario = Scenario {
            network,
            flows,
            engine: self.engine.kind,
            params: EngineParams {
                m: self.engine.m,
                beta: self.engine.beta,
                ..EngineParams::default()
            },
            slots: self.run.slots,
            warmup: self.run.warmup.unwrap_or(self.run.slots / 2),
            seed: self.run.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// The fully resolved file for a scenario: every optional key explicit,
    /// so the emitted manifest re-runs identically.
    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            network: NetworkSection {
                nodes: s.network.num_nodes(),
                interference: s.network.interference(),
                c_max: s.network.c_max(),
                links: s
                    .network
                    .links()
                    .iter()
                    .map(|l| (l.tail, l.head, l.capacity))
                    .collect(),
            },
            flows: s
                .flows
                .iter()
                .map(|f| FlowSection {
                    id: f.id,
                    source: f.source,
                    dest: f.dest,
                    route: f.route.clone(),
                    traffic: TrafficSection::from_model(&f.traffic),
                })
                .collect(),
            engine: EngineSection { kind: s.engine, m: s.params.m, beta: s.params.beta },
            run: RunSection { slots: s.slots, warmup: Some(s.warmup), seed: s.seed },
        }
    }

    /// Apply one `key=value` override. Supported keys: `m`, `beta`, `slots`,
    /// `warmup`, `seed`, `lambda` (sets every inelastic flow's rate),
    /// `epsilon` (likewise), `x_max` (every elastic flow's cap).
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value
                .parse()
                .map_err(|_| CliError::Parse(format!("bad value \"{value}\" for {key}")))
        }
        match key {
            "m" => self.engine.m = num(key, value)?,
            "beta" => self.engine.beta = num(key, value)?,
            "slots" => {
                self.run.slots = num(key, value)?;
                self.run.warmup = None;
            }
            "warmup" => self.run.warmup = Some(num(key, value)?),
            "seed" => self.run.seed = num(key, value)?,
            "lambda" => {
                let v: f64 = num(key, value)?;
                for f in &mut self.flows {
                    if f.traffic.kind == "inelastic" {
                        f.traffic.lambda = Some(v);
                    }
                }
            }
            "epsilon" => {
                let v: f64 = num(key, value)?;
                for f in &mut self.flows {
                    if f.traffic.kind == "inelastic" {
                        f.traffic.epsilon = Some(v);
                    }
                }
            }
            "x_max" => {
                let v: f64 = num(key, value)?;
                for f in &mut self.flows {
                    if f.traffic.kind == "elastic" {
                        f.traffic.x_max = Some(v);
                    }
                }
            }
            other => return Err(CliError::Parse(format!("unknown override key \"{other}\""))),
        }
        Ok(())
    }
}

/// Recognize `tag=value` pairs from `--set`.
pub fn split_override(spec: &str) -> Result<(&str, &str), CliError> {
    spec.split_once('=')
        .ok_or_else(|| CliError::Parse(format!("override \"{spec}\" is not key=value")))
}
