//! Slotted-time simulation of back-pressure scheduling and routing in
//! multi-hop wireless networks.
//!
//! The crate is organized around three scheduling engines that share a
//! network model and a max-weight schedule solver:
//!
//! * [`engine::TraditionalEngine`] — per-flow queues at every node, weights
//!   are differential backlogs, fixed routes.
//! * [`engine::ShadowEngine`] — per-flow counters drive scheduling while a
//!   single FIFO per link carries the real packets; real transmissions are
//!   permit-coupled to counter service.
//! * [`engine::MinResourceEngine`] — per-destination queues with weights
//!   penalized by a constant per hop, routing chosen hop by hop.
//!
//! The [`harness`] module drives an engine for a fixed horizon with seeded
//! randomness and collects metrics; [`oracle`] provides closed-form optima
//! for the linear network used as ground truth in tests; [`scenarios`]
//! builds the canonical networks; [`checks`] bundles the verification
//! batteries used by the CLI and the acceptance suite.

pub mod checks;
pub mod engine;
pub mod harness;
pub mod net;
pub mod oracle;
pub mod scenarios;
pub mod solver;
pub mod traffic;

pub use harness::{run, EngineKind, EngineParams, MetricsLog, Scenario};
pub use net::{FlowSpec, Interference, Link, ModelError, Network, Schedule, TrafficModel};
pub use solver::{max_weight_schedule, LinkWeights};
pub use traffic::UtilityKind;
