use alloc::string::String;

/// Everything that can go wrong inside the segmentation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate grid {rows}x{cols}: both axes need at least {min} pixels")]
    DegenerateDims {
        rows: usize,
        cols: usize,
        min: usize,
    },

    #[error("data length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("intensity {value} at index {index} lies outside [0, 1]")]
    IntensityOutOfRange { index: usize, value: f64 },

    #[error("no edges detected")]
    NoEdgesDetected,

    #[error("non-finite phase field value after iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("energy increased at iteration {iteration}: {before} -> {after}")]
    EnergyIncrease {
        iteration: usize,
        before: f64,
        after: f64,
    },

    #[error("stabilizer must be positive, got {0}")]
    NonPositiveStabilizer(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
