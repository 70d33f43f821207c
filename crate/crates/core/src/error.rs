use thiserror::Error;

/// Errors raised by the segmentation toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    /// A non-finite value appeared during evolution. `x`/`y` locate the
    /// first offending pixel in row-major order.
    #[error("non-finite level-set value {value} at pixel ({x}, {y})")]
    NumericFailure { x: usize, y: usize, value: f64 },

    #[error("epicardium does not contain the endocardium ({missing} endocardial pixels outside)")]
    ContainmentFailure { missing: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
