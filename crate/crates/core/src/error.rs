use thiserror::Error;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Dimension,
    Domain,
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PtError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation requires dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("matrix or vector contains non-finite entries")]
    NonFinite,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("input vectors are linearly dependent")]
    DependentInput,

    #[error("P is not an involution (|P^2 - I| = {residual:.3e})")]
    NotInvolutoryP { residual: f64 },
    #[error("T is not an anti-linear involution (|T conj(T) - I| = {residual:.3e})")]
    NotInvolutoryT { residual: f64 },
    #[error("P and T do not commute (|PT - T conj(P)| = {residual:.3e})")]
    NonCommuting { residual: f64 },
    #[error("Hamiltonian is not PT-symmetric (residual {residual:.3e})")]
    NotPtSymmetric { residual: f64 },
    #[error("spectrum is not closed under complex conjugation")]
    InconsistentSpectrum,
    #[error("Hamiltonian is defective (non-trivial Jordan structure)")]
    DefectiveInput,
    #[error("eigenframe is singular or too ill-conditioned")]
    SingularFrame,
    #[error("invalid block pattern: {0}")]
    InvalidPattern(String),

    #[error("Hamiltonian is not in the unbroken PT phase ({kind})")]
    NotUnbroken { kind: String },
    #[error("eta does not intertwine H (|H^dag eta - eta H| = {residual:.3e})")]
    NotIntertwining { residual: f64 },
    #[error("repeated eigenvalues are not supported for signature extraction")]
    DegenerateSpectrumUnsupported,
    #[error("eta is not greater than the identity (min eigenvalue {min_eigenvalue:.6})")]
    EtaNotGreaterThanI { min_eigenvalue: f64 },
    #[error("supplied H1 is not Hermitian (residual {residual:.3e})")]
    SuppliedH1NotHermitian { residual: f64 },

    #[error("zero vector")]
    ZeroVector,
    #[error("state is not in the graph subspace Y_tau (residual {residual:.3e})")]
    NotInSubspace { residual: f64 },
    #[error("linear map is zero; use the zero-map completion")]
    ZeroMap,
    #[error("invalid subspace map: {0}")]
    InvalidSubspaceMap(String),
    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },
    #[error("state is not normalized (norm {norm:.12})")]
    NotNormalized { norm: f64 },
    #[error("the composed channel annihilates the input state")]
    ZeroFinalState,
    #[error("experiment branch {branch} has zero amplitude")]
    ZeroBranch { branch: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl PtError {
    pub fn category(&self) -> ErrorCategory {
        use PtError::*;
        match self {
            Parse(_) => ErrorCategory::Parse,
            NonSquare { .. } | DimensionMismatch { .. } | WrongDimension { .. } | NonFinite => {
                ErrorCategory::Dimension
            }
            NumericalFailure(_) | SingularFrame | InconsistentSpectrum => ErrorCategory::Numerical,
            _ => ErrorCategory::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, PtError>;
