use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    Data(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph contains a directed cycle")]
    CyclicGraph,
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid order: {0}")]
    Order(String),
    #[error("node {node} has {size} parents, limit is {limit}")]
    ParentLimit { node: usize, size: usize, limit: usize },
    #[error("rank {rank} out of range 1..={total} for {k}-combinations of {n}")]
    Rank { n: usize, k: usize, rank: u64, total: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("value {0} is outside [0, 1]")]
    Probability(f64),
    #[error("score cache needs {needed} bytes, cap is {cap}")]
    Capacity { needed: u128, cap: u128 },
    #[error("swap proposal needs at least two nodes, got {0}")]
    Proposal(usize),
    #[error("argmax reduction over cells holding no work")]
    EmptyWork,
    #[error("node count mismatch: {0} vs {1}")]
    NodeCountMismatch(usize, usize),
    #[error("score cache file: {0}")]
    CacheFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
