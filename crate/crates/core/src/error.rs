use std::path::PathBuf;

use thiserror::Error;

use crate::model::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid flow {flow}: {reason}")]
    Flow { flow: usize, reason: String },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("infeasible routing action at node {node}: {reason}")]
    InfeasibleAction { node: NodeId, reason: String },

    #[error("node {0} is covered by both the controllable and the uncontrollable action")]
    OverlappingActions(NodeId),

    #[error("action for node {node} supplied on the wrong side of the controllable/uncontrollable split")]
    WrongPartition { node: NodeId },

    #[error("invalid policy: {0}")]
    Policy(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot drop {demand} packets: only {available} arrived this slot")]
    DropDemand { demand: u64, available: u64 },

    #[error("zero estimate with radius {radius} < 2 has no feasible distribution")]
    EmptyEstimate { radius: f64 },

    #[error("value iteration did not converge in {iterations} iterations (span {span:e} > {target:e})")]
    NotConverged {
        iterations: usize,
        span: f64,
        target: f64,
    },

    #[error("queue state with total backlog {total} lies outside the truncated space (V = {truncation})")]
    OutsideTruncation { total: u64, truncation: u32 },

    #[error("state space too large: {0}")]
    StateSpace(String),

    #[error("unknown scenario `{name}` (valid: {valid})")]
    UnknownScenario { name: String, valid: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
}
