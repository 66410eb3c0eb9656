use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("function is singular on the kernel of the matrix; use support_only")]
    SingularOffSupport,

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("probabilities are not normalized (total {0})")]
    NotNormalized(f64),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("measurement is not projection-valued: {0}")]
    NotPvm(String),

    #[error("invalid relabeling: {0}")]
    InvalidRelabel(String),

    #[error("ensemble average differs from the reference state by {0:.3e}")]
    AverageMismatch(f64),

    #[error("state has rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    #[error("ensemble member is not supported on the average state (leak {0:.3e})")]
    SupportMismatch(f64),

    #[error("conjugate basis is not unbiased (max overlap deviation {0:.3e})")]
    NotUnbiased(f64),

    #[error("unsupported qubit count {0}")]
    UnsupportedN(usize),

    #[error("optimizer budget must be at least 1")]
    OptimizerBudgetZero,

    #[error("eigendecomposition failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
