use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// No codebook beam admits a center that sees the whole cluster.
    #[error("no beam in the codebook covers cluster {members:?} from a single position")]
    FeasibleBeamNotFound { members: Vec<usize> },

    /// Some harvesters receive no usable power from any selected anchor/beam pair.
    #[error("energy requirement infeasible for harvesters {ehs:?}")]
    Infeasible { ehs: Vec<usize> },

    #[error("linear program {0}")]
    Lp(#[from] crate::planner::simplex::LpError),

    #[error("plan references unknown anchor {0}")]
    UnknownAnchor(usize),

    #[error("format error: {0}")]
    Format(String),
}
