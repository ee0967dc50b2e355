//! Deterministic signal primitives shared by the codec and the scene
//! synthesizer: resampling, framing, windowed FFT magnitudes, convolution,
//! WAV I/O.
//!
//! Everything here is a pure function of its inputs and runs in double
//! precision. All operations are safe to call from many threads at once.

mod convolve;
mod fft;
mod frame;
mod resample;
pub mod wav;

pub use convolve::convolve;
pub use fft::{fft_complex, fft_magnitude, ifft_complex};
pub use frame::frame_signal;
pub use resample::resample;

use crate::{Error, Result};

/// Canonical processing rate of the whole artifact.
pub const CANONICAL_RATE: u32 = 16_000;

/// Mono or stereo sampled audio at a declared rate.
///
/// Samples are dimensionless amplitudes, nominally in `[-1, 1]`. Channels
/// are stored planar. The constructors validate the type invariants: a
/// positive rate, equal channel lengths, and finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    channels: Vec<Vec<f64>>,
    rate: u32,
}

impl SampleBuffer {
    /// Mono buffer from raw samples.
    pub fn mono(samples: Vec<f64>, rate: u32) -> Result<Self> {
        Self::new(vec![samples], rate)
    }

    /// Stereo buffer from left/right samples.
    pub fn stereo(left: Vec<f64>, right: Vec<f64>, rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::ChannelLengthMismatch {
                left: left.len(),
                right: right.len(),
            });
        }
        Self::new(vec![left, right], rate)
    }

    fn new(channels: Vec<Vec<f64>>, rate: u32) -> Result<Self> {
        if rate == 0 {
            return Err(Error::InvalidRate("rate must be positive".into()));
        }
        debug_assert!(matches!(channels.len(), 1 | 2));
        for (c, ch) in channels.iter().enumerate() {
            if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample {
                    channel: c,
                    index: i,
                    value: ch[i],
                });
            }
        }
        Ok(SampleBuffer { channels, rate })
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_seconds(&self) -> f64 {
        self.len() as f64 / self.rate as f64
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    /// Mono view; errors if the buffer is stereo.
    pub fn as_mono(&self) -> Result<&[f64]> {
        if self.channels.len() != 1 {
            return Err(Error::ChannelCount {
                expected: 1,
                got: self.channels.len(),
            });
        }
        Ok(&self.channels[0])
    }

    /// Collapses stereo to mono by averaging; mono passes through unchanged.
    pub fn to_mono(&self) -> SampleBuffer {
        if self.channels.len() == 1 {
            return self.clone();
        }
        let (l, r) = (&self.channels[0], &self.channels[1]);
        let mixed = l.iter().zip(r).map(|(a, b)| 0.5 * (a + b)).collect();
        SampleBuffer {
            channels: vec![mixed],
            rate: self.rate,
        }
    }

    /// Splits a stereo buffer into per-ear mono buffers.
    pub fn split_stereo(&self) -> Result<(SampleBuffer, SampleBuffer)> {
        if self.channels.len() != 2 {
            return Err(Error::ChannelCount {
                expected: 2,
                got: self.channels.len(),
            });
        }
        Ok((
            SampleBuffer {
                channels: vec![self.channels[0].clone()],
                rate: self.rate,
            },
            SampleBuffer {
                channels: vec![self.channels[1].clone()],
                rate: self.rate,
            },
        ))
    }
}

/// Analysis window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rect,
}

impl Window {
    /// Window coefficients of length `n` (periodic Hann, suited to FFT
    /// analysis: `w[i] = 0.5 (1 - cos(2 pi i / n))`).
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => {
                let step = 2.0 * std::f64::consts::PI / n as f64;
                (0..n).map(|i| 0.5 * (1.0 - (step * i as f64).cos())).collect()
            }
        }
    }
}

/// Frame length, hop, and window used to slice a signal for analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub frame_len: usize,
    pub hop: usize,
    pub window: Window,
}

impl FrameSpec {
    pub fn new(frame_len: usize, hop: usize, window: Window) -> Result<Self> {
        if hop == 0 || hop > frame_len {
            return Err(Error::param(format!(
                "frame spec requires 0 < hop <= frame_len, got hop {hop}, frame_len {frame_len}"
            )));
        }
        Ok(FrameSpec {
            frame_len,
            hop,
            window,
        })
    }

    /// Number of full frames in a signal of `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            (len - self.frame_len) / self.hop + 1
        }
    }
}

#[cfg(test)]
mod tests;
