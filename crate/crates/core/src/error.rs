use thiserror::Error;

/// Errors raised by the numeric, simulator and gradient pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not hermitian (defect {defect:.3e} exceeds {tolerance:.3e})")]
    NonHermitianInput { defect: f64, tolerance: f64 },

    #[error("matrix is singular: pivot {pivot:.3e} at step {step} is below {threshold:.3e}")]
    SingularMatrix { step: usize, pivot: f64, threshold: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e}")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("block is rank deficient: singular value ratio {ratio:.3e}")]
    RankDeficientBlock { ratio: f64 },

    #[error("eigenvalue {index} is degenerate (gap {gap:.3e})")]
    DegenerateEigenvalue { index: usize, gap: f64 },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid register layout (m = {m}, n = {n})")]
    InvalidLayout { m: usize, n: usize },

    #[error("system register is not in the all-zero state")]
    NotInGroundRegister,

    #[error("target state is not normalized (norm {norm:.12})")]
    UnnormalizedTarget { norm: f64 },

    #[error("controlled family has {found} members, register needs {expected}")]
    FamilySizeMismatch { expected: usize, found: usize },

    #[error("family member {index} is not unitary (defect {defect:.3e})")]
    NonUnitaryMember { index: usize, defect: f64 },

    #[error("phi is not normalized (norm {norm:.12})")]
    UnnormalizedPhi { norm: f64 },

    #[error("invalid gradient encoding: {0}")]
    InvalidEncoding(String),

    #[error("probabilities out of range (p0 = {p0}, p1 = {p1})")]
    ProbabilityOutOfRange { p0: f64, p1: f64 },

    #[error("deviation distribution is flat (max probability {max_probability:.3e})")]
    FlatDistribution { max_probability: f64 },

    #[error("eigenvalue {eigenvalue:.3e} at index {index} is too close to zero")]
    NearZeroEigenvalue { index: usize, eigenvalue: f64 },

    #[error("eigenpair {index} is not converged (residual {residual:.3e})")]
    UnconvergedEigenpair { index: usize, residual: f64 },

    #[error("kernel system is ill conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
