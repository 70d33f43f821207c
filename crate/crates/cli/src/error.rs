use std::io;
use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

/// Why a PNM file could not be decoded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("multi-channel image ({0}); a single-channel PGM is required")]
    MultiChannel(&'static str),
    #[error("truncated: {0}")]
    Truncated(String),
    #[error("malformed: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: file not found", .0.display())]
    Missing(PathBuf),

    #[error("{}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("{}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error("{}: {kind}", path.display())]
    Image { path: PathBuf, kind: ImageError },

    #[error("{}: line {line}: {msg}", path.display())]
    Config {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] lvseg_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(lvseg_core::Error::NumericFailure { .. }) => 3,
            CliError::Core(lvseg_core::Error::ContainmentFailure { .. }) => 4,
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }

    /// Stable identifier of the failure class.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Missing(_) => "missing_file",
            CliError::Read { .. } => "read_error",
            CliError::Write { .. } => "write_error",
            CliError::Image { kind, .. } => match kind {
                ImageError::Unsupported(_) => "unsupported_format",
                ImageError::MultiChannel(_) => "multi_channel",
                ImageError::Truncated(_) => "truncated_image",
                ImageError::Malformed(_) => "malformed_image",
            },
            CliError::Config { .. } => "invalid_config",
            CliError::Usage(_) => "invalid_arguments",
            CliError::Core(e) => match e {
                lvseg_core::Error::InvalidArgument(_) => "invalid_argument",
                lvseg_core::Error::DimensionMismatch { .. } => "dimension_mismatch",
                lvseg_core::Error::NumericFailure { .. } => "numeric_failure",
                lvseg_core::Error::ContainmentFailure { .. } => "containment_failure",
                lvseg_core::Error::UndefinedMetric(_) => "undefined_metric",
            },
        }
    }

    /// One-line JSON error record.
    pub fn to_json(&self) -> String {
        json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}
