use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Scalars are carried as `f64` regardless of the working precision so the
/// error type stays independent of the scalar parameter.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (residual {residual:.3e} > tol {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e} <= tol {tol:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64, tol: f64 },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("point {point:?} outside the domain on axis {axis} ({label})")]
    OutOfDomain { point: Vec<f64>, axis: usize, label: String },

    #[error("point has {got} coordinates, model expects {expected}")]
    WrongArity { expected: usize, got: usize },

    #[error("finite-difference stencil of step {step:.3e} leaves the domain on axis {axis} at {point:?}")]
    StepTooLarge { point: Vec<f64>, axis: usize, step: f64 },

    #[error("axis index {axis} out of range (model has {count} parameters)")]
    BadAxis { axis: usize, count: usize },

    #[error("metric invalid at {point:?}: {reason}")]
    MetricInvalid { point: Vec<f64>, reason: String },

    #[error("spectrum degenerate (gap {gap:.3e} below threshold {threshold:.3e})")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("band {band} degenerate at {point:?} (gap {gap:.3e})")]
    DegenerateBand { band: usize, point: Vec<f64>, gap: f64 },

    #[error("band index {band} out of range for dimension {dim}")]
    BadBand { band: usize, dim: usize },

    #[error("Hamiltonian is not diagonalizable (eigenvector condition {condition:.3e})")]
    NonDiagonalizable { condition: f64 },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("initial transport matrix not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("path is not closed")]
    PathNotClosed,

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("frame singular at sample {sample} (condition number {condition:.3e})")]
    SingularFrame { sample: usize, condition: f64 },

    #[error("band crossing or tracking failure along loop at sample {sample} (overlap {overlap:.3e})")]
    BandCrossingOnLoop { sample: usize, overlap: f64 },

    #[error("Hermitian image of the loop does not close (endpoint overlap {overlap:.3e}); its Berry phase is undefined")]
    OpenHermitianImage { overlap: f64 },

    #[error("integration unstable: eta-norm drift {drift:.3e} exceeds {limit:.3e}")]
    StepUnstable { drift: f64, limit: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
