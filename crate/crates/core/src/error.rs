use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node index {index} out of range for {num_nodes} nodes (line {line})")]
    IndexOverflow {
        index: usize,
        num_nodes: usize,
        line: usize,
    },

    #[error("empty graph: no nodes")]
    EmptyGraph,

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("node {0} has no self-loop; call add_self_loops before normalize")]
    MissingSelfLoop(usize),

    #[error("node {0} has zero degree")]
    ZeroDegree(usize),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("solver/spec mismatch: {0}")]
    SolverMismatch(String),

    #[error("non-invertible reparameterization: {0}")]
    NonInvertible(String),

    #[error("filter not expressible by this construction: {0}")]
    NotExpressible(String),

    #[error("graph too large for dense eigensolve: {nodes} nodes (limit {limit})")]
    TooLarge { nodes: usize, limit: usize },

    #[error("mask selects no nodes")]
    EmptyMask,

    #[error("stale forward cache: cache generation {cache} != parameter generation {params}")]
    StaleCache { cache: u64, params: u64 },

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("training diverged at epoch {epoch} (last finite epoch {last_finite_epoch})")]
    Diverged {
        epoch: usize,
        last_finite_epoch: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
