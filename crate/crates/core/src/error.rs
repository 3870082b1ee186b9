use thiserror::Error;

/// Errors raised by constructions and checks in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("test functions live on different lattices")]
    LatticeMismatch,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian: relative asymmetry {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },

    #[error("reflection positivity violated: J-Gram min eigenvalue {min_eigenvalue:e}")]
    RpViolation { min_eigenvalue: f64 },

    #[error("physical space is zero-dimensional after quotienting null vectors")]
    DegenerateSpace,

    #[error("shift of {step} lattice steps leaves the lattice; max representable step is {max_step}")]
    Range { step: usize, max_step: usize },

    #[error("transfer operator has non-positive eigenvalue {0:e}; logarithm undefined")]
    NonPositiveTransfer(f64),

    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid involution: {0}")]
    InvalidInvolution(String),

    #[error("cone check failed: {0}")]
    Cone(String),

    #[error("unknown built-in example `{0}`")]
    UnknownExample(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
