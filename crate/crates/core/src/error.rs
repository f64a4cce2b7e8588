use thiserror::Error;

/// Errors raised by state construction, linear algebra and protocol runs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("not a density operator: {0}")]
    InvalidDensity(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid label permutation: {0}")]
    BadPermutation(String),

    #[error("measurement basis is not orthonormal (max deviation {0:e})")]
    BasisNotOrthonormal(f64),

    #[error("outcome {outcome} has zero probability ({probability:e})")]
    ZeroProbability { outcome: String, probability: f64 },

    #[error("{name} = {value} is outside {allowed}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("post-selected branch has vanishing weight {0:e}")]
    Degenerate(f64),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
