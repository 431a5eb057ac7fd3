use std::path::PathBuf;

/// Errors produced by the depth-adjustment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("disparity map has no valid pixels")]
    EmptyMap,
    #[error("invalid scene spec: {0}")]
    Spec(String),
    #[error("value out of domain: {0}")]
    Domain(String),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("normal equations are singular")]
    SingularSystem,
    #[error("episode already terminated")]
    TerminalState,
    #[error("empty training batch")]
    EmptyBatch,
    #[error("feature fingerprint mismatch: model has {model}, environment has {env}")]
    FingerprintMismatch { model: String, env: String },
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
