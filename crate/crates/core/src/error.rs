use thiserror::Error;

/// Errors produced by the simulator and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Slope fitting could not use the requested window.
    #[error("insufficient data for slope fit: {reason}; deficient SNR cells (dB): {cells:?}")]
    InsufficientData { reason: String, cells: Vec<f64> },

    #[error("off-grid path delay {tau} s (sampling interval {ts} s)")]
    OffGridDelay { tau: f64, ts: f64 },

    #[error("failed to parse config: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
