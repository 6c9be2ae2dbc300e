use thiserror::Error;

/// Errors raised by the recognition pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("rectangle {x},{y} {w}x{h} exceeds image bounds {width}x{height}")]
    OutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        width: usize,
        height: usize,
    },

    #[error("value {value} out of range for {what}")]
    OutOfRange { what: String, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("clusters without a label mapping: {0:?}")]
    UnmappedClusters(Vec<usize>),

    #[error("label {0:?} is not defined in the script model")]
    UnknownLabel(String),

    #[error("anchor {0} has no positive in the batch")]
    NoPositive(usize),

    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
