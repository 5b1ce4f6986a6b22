use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge ({0}, {1}) borders more than two faces")]
    NonManifold(usize, usize),

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("invalid count {count}: expected {expected}")]
    InvalidCount { count: usize, expected: String },

    #[error("metric interpolation alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("regularization floor epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("regularization weight mu must be non-negative, got {0}")]
    NegativeMu(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("field has (numerically) zero Dirichlet energy; the bound is trivial")]
    ConstantFunction,

    #[error("rival fields are rank deficient in the mass inner product")]
    RankDeficientRival,

    #[error("vertex {0} is unreachable from the source")]
    DisconnectedMesh(usize),

    #[error("distance matrix is not symmetric with zero diagonal (max defect {0:e})")]
    AsymmetricInput(f64),

    #[error("problem size {size} exceeds dense solver cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("sampled eigenvector matrix has rank {rank} < {required}")]
    DegenerateSampling { rank: usize, required: usize },
}

impl Error {
    pub(crate) fn mismatch(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceFailure { .. } | Error::NotPositiveDefinite { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
