use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("out-of-order input: frame at t={got}s after t={previous}s ({reason})")]
    Sequencing {
        previous: f64,
        got: f64,
        reason: &'static str,
    },

    #[error("{}", format_error_message(.path, .frame, .reason))]
    Format {
        path: PathBuf,
        frame: Option<usize>,
        reason: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("frame {frame} lies inside the warm-up period (first {warmup_frames} frames)")]
    WarmUp { frame: usize, warmup_frames: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_error_message(path: &std::path::Path, frame: &Option<usize>, reason: &str) -> String {
    match frame {
        Some(k) => format!("{}: frame {k}: {reason}", path.display()),
        None => format!("{}: {reason}", path.display()),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, frame: Option<usize>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            frame,
            reason: reason.into(),
        }
    }

    /// Short, stable, machine-parsable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::Shape { .. } => "shape",
            Error::Sequencing { .. } => "sequencing",
            Error::Format { .. } => "format",
            Error::Config(_) => "config",
            Error::Contract(_) => "contract",
            Error::WarmUp { .. } => "warm-up",
            Error::Io { .. } => "io",
        }
    }
}
