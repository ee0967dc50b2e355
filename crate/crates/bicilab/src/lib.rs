//! Bilateral cochlear-implant (BiCI) sound-coding laboratory.
//!
//! The crate bundles everything needed to run desk-scale BiCI denoising
//! experiments end to end:
//!
//! - [`dsp`] — resampling, framing, FFT magnitudes, convolution, WAV I/O.
//! - [`ace`] — the clinical ACE sound coding strategy (band envelopes,
//!   N-of-M selection, loudness growth compression, current mapping) and the
//!   `Electrodogram` type shared across the crate.
//! - [`scene`] — binaural scene synthesis: parametric or BRIR spatialization
//!   and better-ear SNR mixing.
//! - [`nn`] — a minimal double-precision tensor engine with reverse-mode
//!   automatic differentiation and Adam.
//! - [`deep_ace`] — the Deep ACE model in monaural, bilateral, and fused
//!   (double Hadamard fusion) variants plus the training loop.
//! - [`metrics`] — electrodogram-domain evaluation: SNR improvement, linear
//!   cross-correlation, and electric interaural coherence.

pub mod ace;
pub mod deep_ace;
pub mod dsp;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod scene;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
