use thiserror::Error;

/// Errors raised by the operator algebra, state constructors and QFI routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tensor product dimension {dim} exceeds the configured maximum {max}")]
    DimensionLimit { dim: usize, max: usize },

    #[error("operator is not Hermitian (max |M - M^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not unitary (max |U^dagger U - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("Fock truncation too small: population {tail_mass:e} near the cutoff edge; use cutoff >= {required_cutoff}")]
    Truncation { tail_mass: f64, required_cutoff: usize },

    #[error("insufficient Fock cutoff: thermal mass requires cutoff >= {required_cutoff}")]
    InsufficientCutoff { required_cutoff: usize },

    #[error("state needs a Fock cutoff of at least {required_cutoff}, above the limit {max}")]
    CutoffLimit { required_cutoff: usize, max: usize },

    #[error("zero detuning: the dispersive model is singular at delta = 0")]
    ZeroDetuning,

    #[error("state weights are not normalized: sum = {total}")]
    NonNormalizedSupport { total: f64 },

    #[error("uninformative quadrature: d<M>/dh vanishes at the working point")]
    UninformativeQuadrature,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
