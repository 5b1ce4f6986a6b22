#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] eigenshape::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for numerical failures, 1 for everything caused by the inputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use eigenshape::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Output { .. } => "output",
            CliError::Core(e) => match e {
                E::Io { .. } => "io",
                E::Parse { .. } => "parse",
                E::NonManifold(..) => "non-manifold",
                E::EmptyMesh => "empty-mesh",
                E::InvalidCount { .. } => "invalid-count",
                E::InvalidAlpha(_) => "invalid-alpha",
                E::InvalidEpsilon(_) => "invalid-epsilon",
                E::NegativeMu(_) => "negative-mu",
                E::DimensionMismatch { .. } => "dimension-mismatch",
                E::ConvergenceFailure { .. } => "convergence-failure",
                E::NotPositiveDefinite { .. } => "not-positive-definite",
                E::ConstantFunction => "constant-function",
                E::RankDeficientRival => "rank-deficient-rival",
                E::DisconnectedMesh(_) => "disconnected-mesh",
                E::AsymmetricInput(_) => "asymmetric-input",
                E::TooLarge { .. } => "too-large",
                E::DegenerateSampling { .. } => "degenerate-sampling",
            },
        }
    }
}
