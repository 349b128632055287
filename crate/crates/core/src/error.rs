use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, TubalError>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TubalError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("transform is singular (inverse residual {residual:e})")]
    SingularTransform { residual: f64 },

    #[error("transform is not real-preserving")]
    NotRealPreserving,

    #[error("transform is not doubly real-preserving")]
    NotDoublyRealPreserving,

    #[error("transform is not unitary")]
    NotUnitary,

    /// An inverse transform produced a vector whose imaginary part exceeds
    /// the realness tolerance. `value` carries the complex result when the
    /// operation is a single tubal-scalar product.
    #[error("realness violation: imaginary residual {residual:e} exceeds {tolerance:e}")]
    RealnessViolation {
        residual: f64,
        tolerance: f64,
        value: Option<Vec<Complex64>>,
    },

    #[error("tubal scalar is not invertible: transform component {component} has modulus {modulus:e}")]
    NotInvertible { component: usize, modulus: f64 },

    #[error("SVD did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("rank {rank} outside admissible range 1..{limit}")]
    RankOutOfRange { rank: usize, limit: usize },

    #[error("tensor is zero; no rank factorization exists")]
    ZeroTensor,

    /// The B-rank cut keeps one transform slice of a conjugate pair but not
    /// its partner, so the truncation has no real representative.
    #[error("B-rank {rank} separates conjugate slices {kept} and {dropped}")]
    SplitConjugatePair {
        rank: usize,
        kept: usize,
        dropped: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for TubalError {
    fn from(e: std::io::Error) -> Self {
        TubalError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for TubalError {
    fn from(e: serde_json::Error) -> Self {
        TubalError::Parse(e.to_string())
    }
}
