use thiserror::Error;

/// Errors produced by graph construction, estimators, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node id {0} out of range (graph has {1} nodes)")]
    InvalidNode(u32, usize),
    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(u32),
    #[error("observation set is empty")]
    EmptyObservation,
    #[error("node {node} is unreachable from node {from}")]
    Unreachable { node: u32, from: u32 },
    #[error("operation requires a tree, but the graph has a cycle or is disconnected")]
    NotATree,
    #[error("tree method on general graph")]
    TreeMethodOnGeneralGraph,
    #[error("elapsed time {t} is below the feasible minimum {min}")]
    InfeasibleTime { t: u32, min: u32 },
    #[error("invalid infection path: {0}")]
    InvalidPath(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{what} exceeds the oracle guard: {actual} > {limit}")]
    ScaleRefused {
        what: &'static str,
        limit: u64,
        actual: u64,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
