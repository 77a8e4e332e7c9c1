use thiserror::Error;

/// Errors surfaced by the core numerics.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("matrix is rank deficient: {0}")]
    RankDeficient(String),
    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
    #[error("principal submatrix is numerically singular")]
    SingularSubmatrix,
    #[error("linear system defining the discretized vector is singular")]
    SingularSystem,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("ellipsoid generators are not pairwise orthogonal (max |<Xi,Xj>| = {0:.3e})")]
    NonOrthogonalGenerators(f64),
    #[error("witness certificate invalid: {0}")]
    CertificateInvalid(String),
    #[error("no admissible lattice point found near the disc center")]
    LatticePointNotFound,
    #[error("enumeration budget of {budget} combinations exhausted after {tried}")]
    BudgetExceeded { budget: usize, tried: usize },
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
