use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequency {freq_hz} Hz is at or below the guided-mode cutoff {cutoff_hz} Hz")]
    BelowCutoff { freq_hz: f64, cutoff_hz: f64 },

    #[error("index {index} out of range for {len} elements")]
    Index { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parse error in {}{}: {message}", source_name(.path), line_suffix(*.line))]
    Parse {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn source_name(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => p.display().to_string(),
        None => "<input>".to_string(),
    }
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" line {l}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line,
            message: message.into(),
        }
    }

    /// Attach a file path to a parse error that was raised on in-memory text.
    pub fn with_path(self, file: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                path: Some(file.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }

    /// Process exit code used by the command-line tool for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::ResourceLimit(_) => 2,
            Error::Parse { .. } | Error::Io { .. } => 3,
            Error::Degenerate(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
