use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("{0} did not converge")]
    DecompositionFailure(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("columns span only the zero subspace")]
    ZeroSubspace,

    #[error("{which} is not invertible (condition number {cond:.3e})")]
    NotInvertible { which: &'static str, cond: f64 },

    /// Indices are zero-based.
    #[error("C*πC′ is not a positive operator for members {indices:?}")]
    PositivityViolated { indices: Vec<usize> },

    #[error("erasing every member leaves an empty system")]
    EmptyRemainder,

    #[error("invalid index set: {0}")]
    InvalidIndices(String),

    #[error("weight must be positive (member {index}: {weight})")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("the approximation operator needs both systems to share one weight family")]
    WeightMismatch,

    #[error("a frame needs at least one element")]
    Empty,

    #[error("random generation failed: {0}")]
    GenerationFailure(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
}
