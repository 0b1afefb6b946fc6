use thiserror::Error;

/// Errors produced by the layoutforge library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate point: horizon depth is undefined on the camera axis")]
    DegeneratePoint,

    #[error("degenerate segment between samples {index} and {next}")]
    DegenerateSegment { index: usize, next: usize },

    #[error("inconsistent annotation: {0}")]
    InconsistentAnnotation(String),

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("render error at pixel (row {row}, col {col}): {reason}")]
    Render { row: usize, col: usize, reason: String },

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("camera placement failed: {0}")]
    Placement(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
