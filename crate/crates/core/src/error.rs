use crate::metric::SpaceId;
use crate::zoo::dsl::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("points belong to different spaces ({0} vs {1})")]
    SpaceMismatch(SpaceId, SpaceId),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unreachable: {0}")]
    Unreachable(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("horizon {horizon} too small: {detail}")]
    HorizonTooSmall { horizon: f64, detail: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("ray never reaches the escape level {level}")]
    NeverEscapes { level: f64 },
    #[error("oracle window: {0}")]
    OracleWindow(String),
    #[error("build error: {0}")]
    Build(#[from] crate::complex::BuildError),
    #[error("{0}")]
    Diagnostic(Diagnostic),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<Diagnostic> for Error {
    fn from(d: Diagnostic) -> Self {
        Error::Diagnostic(d)
    }
}
