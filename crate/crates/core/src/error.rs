use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters violate the family's admissibility rules.
    #[error("invalid family specification: {0}")]
    InvalidSpec(String),

    /// A precondition of an operation was not met by its input.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Both eigenvalues vanish; the point needs the nilpotent analysis.
    #[error("non-hyperbolic point: route to the nilpotent (series) classifier")]
    NonHyperbolic,

    /// The series data vanish through the truncation order.
    #[error("degenerate beyond the nilpotent classification: {0}")]
    Degenerate(String),

    /// Zero linear part or another configuration the classifier does not cover.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("point is not a saddle: {0}")]
    NotSaddle(String),

    #[error("dissipative: no polynomial first integral provided for this family ({0})")]
    Dissipative(String),

    #[error("branch not covered by the closed-form formula: {0}")]
    BranchNotCovered(String),

    /// Evaluation requested too close to a pole of an elliptic or tangent curve.
    #[error("pole proximity: {0}")]
    PoleProximity(String),

    /// Non-finite or otherwise out-of-domain numeric input.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
