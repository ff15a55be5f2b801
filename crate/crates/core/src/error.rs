use alloc::string::String;

use crate::lambda::LambdaIndex;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid spectral parameters: {0}")]
    InvalidParams(&'static str),
    #[error("window parameter K must be at least 1")]
    EmptyWindow,
    #[error("dimension {dim} cannot host a [2K] window (must be a positive multiple of 4)")]
    IncompatibleDim { dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is singular: pivot {pivot_index} has magnitude {pivot:e}")]
    Singular { pivot_index: usize, pivot: f64 },
    #[error("solve residual {residual:e} exceeds tolerance; system is ill-conditioned")]
    IllConditioned { residual: f64 },
    #[error("eigenvalue iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("input is zero")]
    ZeroInput,
    #[error("family is empty")]
    EmptyFamily,
    #[error("family is not a frame (lower bound {alpha:e})")]
    NotAFrame { alpha: f64 },
    #[error("coefficients do not represent the vector (residual {residual:e})")]
    NotRepresented { residual: f64 },
    #[error("families are not a dual pair (residual {residual:e})")]
    InvalidDual { residual: f64 },
    #[error("1 ∈ σ(A): I - A is not invertible")]
    OneInSpectrum,
    #[error("stable recovery requires ρ(A) < 1, but ρ(A) = {rho}")]
    SpectralRadiusTooLarge { rho: f64 },
    #[error("data matrix has no row for λ = {0}")]
    MissingRow(LambdaIndex),
    #[error("window of {rows} rows is too small for a tail of {tail} rows at each end")]
    WindowTooSmall { rows: usize, tail: usize },
    #[error("rows do not converge: tail gap {gap:e} exceeds {tol:e}")]
    NotInBs { gap: f64, tol: f64 },
    #[error("source does not lie in W (distance {distance:e})")]
    SourceNotInW { distance: f64 },
    #[error("not stably recoverable: adjoint family has lower frame bound {alpha:e} on W")]
    NotStablyRecoverable { alpha: f64 },
    #[error("{0}")]
    InvalidInput(String),
}
