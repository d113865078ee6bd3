use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has {rows}x{cols} shape but {len} entries were supplied")]
    BadShape { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix exponential overflows double range (norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("matrix norm is outside double range (largest entry {max_abs:e})")]
    OutOfRange { max_abs: f64 },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("eigensolver did not converge for eigenvalue indices {unconverged:?}")]
    NoConvergence { unconverged: Vec<usize> },

    #[error("eigenpair {index} residual {residual:e} exceeds bound {bound:e}")]
    ResidualExceeded {
        index: usize,
        residual: f64,
        bound: f64,
    },

    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),

    #[error("vector length {0} is not a perfect square")]
    NotPerfectSquare(usize),

    #[error("operator is not involutory: |P^2 - 1| = {residual:e}")]
    NotInvolutory { residual: f64 },

    #[error("operator is not an intertwiner of H: residual {residual:e}")]
    NotIntertwiner { residual: f64 },

    #[error("operator is not stroboscopically conserved: residual {residual:e}")]
    NotConserved { residual: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("time origin {t0} coincides with a kick; the side of the kick is ambiguous")]
    ShiftOnKick { t0: f64 },

    #[error("{model} does not support the {waveform} waveform")]
    UnsupportedWaveform {
        model: &'static str,
        waveform: &'static str,
    },

    #[error("closed form is singular at the exceptional point (gamma = J)")]
    AtExceptionalPoint,

    #[error("closed-form coefficient has imaginary residue {imag:e}")]
    ComplexCoefficient { imag: f64 },

    #[error("no sign change of the discriminant in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("initial state has zero norm")]
    ZeroState,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
