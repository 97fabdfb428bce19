use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty graph")]
    EmptyGraph,

    #[error("empty node id in edge list")]
    EmptyNodeId,

    #[error("node index {index} out of range for graph of {len} nodes")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("unknown service id `{0}`")]
    UnknownService(String),

    #[error("non-monotonic timestamps for service `{service}` at {timestamp}")]
    NonMonotonicTimestamps { service: String, timestamp: i64 },

    #[error("no metrics for service `{0}`")]
    MissingService(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value at node {node} in {stage}")]
    NonFiniteNode { stage: &'static str, node: usize },

    #[error("non-finite gradient in parameter block `{0}`")]
    NonFiniteGradient(String),

    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },

    #[error("gradient check failed for `{block}`: relative error {rel_error:e}")]
    GradientCheck { block: String, rel_error: f64 },

    #[error("insufficient negatives: contrastive pairs need at least 2 nodes")]
    InsufficientNegatives,

    #[error("no normal reference")]
    NoNormalReference,

    #[error("single-class labels: {0}")]
    SingleClass(&'static str),

    #[error("no separating candidate")]
    NoSeparatingCandidate,

    #[error("unknown sweep knob `{0}`")]
    UnknownKnob(String),
}

impl Error {
    /// Numerical failures (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteNode { .. }
                | Error::NonFiniteGradient(_)
                | Error::NonFiniteLoss { .. }
                | Error::GradientCheck { .. }
        )
    }
}
