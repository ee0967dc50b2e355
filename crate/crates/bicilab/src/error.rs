//! Crate error type.

use thiserror::Error;

/// Errors produced by the signal, codec, scene, and model layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Input contained NaN or infinite samples.
    #[error("non-finite sample at index {index} (channel {channel}): {value}")]
    NonFiniteSample {
        channel: usize,
        index: usize,
        value: f64,
    },

    /// A sample rate of zero or an otherwise unusable rate.
    #[error("invalid sample rate: {0}")]
    InvalidRate(String),

    /// Stereo buffers must have equal channel lengths.
    #[error("channel length mismatch: left {left}, right {right}")]
    ChannelLengthMismatch { left: usize, right: usize },

    /// An operation that requires mono input received stereo (or vice versa).
    #[error("expected {expected} channel(s), got {got}")]
    ChannelCount { expected: usize, got: usize },

    /// FFT sizes are restricted to powers of two.
    #[error("FFT length {0} is not a power of two")]
    FftLength(usize),

    /// A parameter or configuration value is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Channel-count / band-table mismatch in the codec.
    #[error("unsupported channel count {got}; supported values: {supported:?}")]
    UnsupportedChannels { got: usize, supported: &'static [usize] },

    /// Tensor shape incompatibility; names the offending dimensions.
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    /// Scene or mixing construction failure (zero-power operands, rate
    /// mismatch between source and impulse response, ...).
    #[error("scene error: {0}")]
    Scene(String),

    /// A numerical failure: divergence during training, non-finite loss.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// File parse errors for the EGF / DWT / manifest text formats.
    #[error("parse error in {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    /// WAV decode/encode errors.
    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, detail: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(detail: impl Into<String>) -> Self {
        Error::InvalidParameter(detail.into())
    }
}
