use thiserror::Error;

/// Errors produced by channel construction, detection, analysis and the
/// experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented range or invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Inputs make the requested quantity undefined (e.g. identical
    /// hypotheses where a threshold is required).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A required input artifact (optimized sequence file, config) is absent.
    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    /// A table or grid that must be nonempty was empty.
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
