//! Configuration-driven front end: parses a run configuration, dispatches one
//! task and writes CSV, JSON and optional SVG artifacts.

pub mod config;
pub mod output;
pub mod svg;
pub mod tasks;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{RunConfig, Task};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("acceptance criteria failed: {0:?}")]
    Verify(Vec<u32>),
    #[error("computation failed: {0}")]
    Compute(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Verify(_) | CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

/// Runs the configured task, writing into `out` (or the configured directory).
pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    match cfg.task {
        Task::Eigs => tasks::eigs(cfg, &dir),
        Task::Proj => tasks::proj(cfg, &dir),
        Task::Pspec => tasks::pspec(cfg, &dir),
        Task::Pmode => tasks::pmode(cfg, &dir),
        Task::Gauge => tasks::gauge(cfg, &dir),
        Task::Verify => tasks::verify(cfg, &dir),
        Task::Report => tasks::report(cfg, &dir),
    }
}

/// Reads and parses a configuration file.
pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text)
}
