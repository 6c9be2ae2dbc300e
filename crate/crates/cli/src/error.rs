use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode image {}: {msg}", path.display())]
    Image { path: PathBuf, msg: String },
    #[error("stage `{stage}` has not been run: {} is missing", path.display())]
    MissingStage { stage: &'static str, path: PathBuf },
    #[error("{}:{line}: {msg}", path.display())]
    Schema { path: PathBuf, line: usize, msg: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] voltage_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
