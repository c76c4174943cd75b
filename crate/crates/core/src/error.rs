use thiserror::Error;

/// Errors produced by the set, sequence and dynamics kernels.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid window [{lo}, {hi}): lo must be strictly below hi")]
    InvalidWindow { lo: i64, hi: i64 },

    #[error("the valid region of the result is empty")]
    EmptyValidRegion,

    #[error("window of {needed} points does not fit in a valid region of length {available}")]
    WindowTooSmall { needed: u64, available: u64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("precision budget exceeded: multiplier needs {needed_bits} bits, only {frac_bits} fractional bits stored")]
    PrecisionBudgetExceeded { needed_bits: u64, frac_bits: u32 },

    #[error("angle must lie strictly inside (0, 2pi)")]
    InvalidAngle,

    #[error("grid resolution too coarse: feature of width {width} needs more than {grid} cells per axis")]
    ResolutionTooCoarse { width: f64, grid: usize },

    #[error("tolerance not reached: best norm {:.6} after {} offsets", .best.final_norm, .best.offsets.len())]
    ToleranceNotReached {
        best: Box<crate::dynamics::CesaroSelection>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
