use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("operator is not positive semidefinite: <Bv, v> = {value:.3e}")]
    NotPositiveSemidefinite { value: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("operation requires a dense operator")]
    DenseRequired,

    #[error("degree {degree} is out of range (maximum {max})")]
    DegreeOutOfRange { degree: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("preconditioner is indefinite on the spectrum: alpha = {alpha:.3e}, beta = {beta:.3e}")]
    IndefinitePreconditioner { alpha: f64, beta: f64 },

    #[error("coefficient equation requires M > rho (M = {m}, rho = {rho})")]
    CoefficientEquation { m: f64, rho: f64 },

    #[error("composite part has no proximal oracle")]
    MissingProxOracle,

    #[error("method supports only the non-composite case")]
    CompositeNotSupported,

    #[error("non-finite objective value at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("line search exceeded {doublings} doublings at iteration {iteration}")]
    LineSearchFailed { iteration: usize, doublings: u32 },

    #[error("polynomial expansion is numerically unreliable: {0}")]
    IllConditioned(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("incompatible configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
