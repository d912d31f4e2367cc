//! File formats, experiment configuration and the error taxonomy shared by
//! the CLI and the C bindings.

mod config;
mod failure;
mod tables;

use thiserror::Error;

pub use config::{CrovisierConfig, ExperimentConfig, OutputConfig, SamplingConfig};
pub use failure::{ErrorClass, Failure};
pub use tables::{
    read_pseudo_orbit_csv, read_set_csv, trace_csv, write_pseudo_orbit_csv, write_set_csv,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("{path}: {msg}")]
    File { path: String, msg: String },
    #[error("line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("json: {0}")]
    Json(String),
    #[error("config: {0}")]
    Toml(String),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl IoError {
    pub fn file(path: impl AsRef<std::path::Path>, e: std::io::Error) -> Self {
        IoError::File {
            path: path.as_ref().display().to_string(),
            msg: e.to_string(),
        }
    }
}

/// Read a whole file, tagging failures with the path.
pub fn read_text(path: impl AsRef<std::path::Path>) -> Result<String, IoError> {
    std::fs::read_to_string(&path).map_err(|e| IoError::file(&path, e))
}

/// Write `text`, creating parent directories.
pub fn write_text(path: impl AsRef<std::path::Path>, text: &str) -> Result<(), IoError> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| IoError::file(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| IoError::file(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize + ?Sized>(value: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| IoError::Json(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
