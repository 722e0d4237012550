use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tone at {frequency_hz} Hz is at or above Nyquist ({nyquist_hz} Hz)")]
    AboveNyquist { frequency_hz: f64, nyquist_hz: f64 },

    #[error("signal has zero power; SNR is undefined")]
    ZeroPower,

    #[error("box size {eps} is finer than one sample spacing ({spacing})")]
    ScaleTooFine { eps: f64, spacing: f64 },

    #[error("non-finite value in VMD iterate at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("every decomposition in the K sweep {k_min}..={k_max} diverged")]
    AllDiverged { k_min: usize, k_max: usize },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::AllDiverged { .. })
    }
}
