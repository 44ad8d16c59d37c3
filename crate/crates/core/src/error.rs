use thiserror::Error;

/// Errors produced by graph construction, analysis and the experiment pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("node id {node} out of range for a graph with {nodes} nodes")]
    NodeOutOfRange { node: usize, nodes: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(usize, usize),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid attack sequence: {0}")]
    InvalidSequence(String),

    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ENC already satisfied, nothing to rectify")]
    AlreadySatisfied,

    #[error("no legal rectification move exists")]
    Stalled,

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            other => Error::Stage {
                stage,
                message: other.to_string(),
            },
        }
    }
}
