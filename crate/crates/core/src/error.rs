use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension d = {0}: need 2 <= d <= 32")]
    InvalidDimension(usize),

    #[error("coefficient matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("degenerate state: coefficient matrix has zero norm")]
    DegenerateState,

    #[error("dimension mismatch: expected d = {expected}, got d = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("state is rank-deficient (sigma_min/sigma_max = {ratio:.3e}); operation needs rank d")]
    RankDeficient { ratio: f64 },

    #[error("weight is not on the magnetic lattice (center residual {residual:.3e})")]
    NonCyclicPath { residual: f64 },

    #[error("path undersampled: consecutive samples differ by {jump:.3e} in Frobenius norm")]
    UndersampledPath { jump: f64 },

    #[error("time {t} outside path domain [0, {duration}]")]
    TimeOutOfDomain { t: f64, duration: f64 },

    #[error("overlap <psi(0)|psi(tau)> has modulus {modulus:.3e}; phase undefined")]
    UndefinedOverlapPhase { modulus: f64 },

    #[error("phase integral did not converge: best estimate {best}, last delta {delta:.3e}")]
    ConvergenceFailure { best: f64, delta: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("matrix is not in SU(d): |det - 1| = {deviation:.3e}")]
    NonUnimodular { deviation: f64 },

    #[error("surface boundary does not match the evolution's coset loop (mismatch {mismatch:.3e})")]
    InconsistentSurface { mismatch: f64 },

    #[error("degenerate grid: need at least {min}x{min}, got {n1}x{n2}")]
    DegenerateGrid { min: usize, n1: usize, n2: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
