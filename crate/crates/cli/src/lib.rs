//! The voltage pipeline as workspace-directory stages:
//! `gen-synthetic`, `extract`, `annotate`, `augment`, `train`, `recognize`
//! and `evaluate`. Each stage reads its predecessor's files and rewrites its
//! own subdirectory of the workspace.

pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod stages;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use io::Workspace;

/// Sizes the global thread pool. Output does not depend on the count.
pub fn init_jobs(jobs: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))
}
