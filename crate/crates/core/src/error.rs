use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown shape kind `{0}` (expected simplex, cube or cube_conn)")]
    UnknownShape(String),
    #[error("composition error: {0}")]
    Composition(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("functoriality violated by generator {generator} at section {section}: {detail}")]
    Functoriality { generator: String, section: String, detail: String },
    #[error("naturality violated: {0}")]
    Naturality(String),
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("shape kind mismatch: {0} vs {1}")]
    KindMismatch(String, String),
    #[error("not a monomorphism: {0}")]
    NotMono(String),
    #[error("fiber over {section} has {size} sections in dimension {dim}, not below kappa = {kappa}")]
    Kappa { section: String, dim: usize, size: usize, kappa: usize },
    #[error("precondition `{name}` failed: {detail}")]
    Precondition { name: String, detail: String },
    #[error("boundary-limited: {0}")]
    BoundaryLimited(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub fn precondition(name: &str, detail: impl Into<String>) -> Self {
        Error::Precondition { name: name.to_string(), detail: detail.into() }
    }

    pub fn is_boundary_limited(&self) -> bool {
        matches!(self, Error::BoundaryLimited(_))
    }
}
