use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension {0}; path states have 2 or 3 modes")]
    InvalidDimension(usize),

    #[error("invalid rotation block ({0}, {1}) for dimension {2}")]
    InvalidBlock(usize, usize, usize),

    #[error("path index {index} out of range for dimension {dim}")]
    PathOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: operator is {operator}x{operator}, state has {state} modes")]
    DimensionMismatch { operator: usize, state: usize },

    #[error("cannot sample a measurement on a zero-norm state")]
    ZeroNorm,

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no feasible (M, N) cell in the search domain")]
    EmptyFeasibleSet,

    #[error("(M={m}, N={n}) cannot deliver {what}")]
    Infeasible { m: u64, n: u64, what: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
