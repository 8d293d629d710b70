use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("state is not symmetric under atom exchange (residual norm {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("mean spin magnitude {magnitude:e} is below the frame threshold; rotated frame undefined")]
    FrameUndefined { magnitude: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("atom index {index} out of range for {n_atoms} atoms")]
    IndexOutOfRange { index: usize, n_atoms: usize },

    #[error("{n_atoms} atoms exceeds the full-space cap of {cap}; pass an explicit override")]
    TooLarge { n_atoms: usize, cap: usize },

    #[error("insufficient shots: {got} < {min}")]
    InsufficientShots { got: u64, min: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable snake_case name, used in machine-readable error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidState(_) => "invalid_state",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::FrameUndefined { .. } => "frame_undefined",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::TooLarge { .. } => "too_large",
            Error::InsufficientShots { .. } => "insufficient_shots",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Internal(_) => "internal",
        }
    }
}
