//! End-to-end deep denoising sound coding: a learned encoder, deep envelope
//! detector, temporal-convolutional separator, masker, and decoder that
//! together replace the clinical ACE chain and emit denoised electrodogram
//! amplitudes directly.
//!
//! Three wirings are built from the same blocks:
//!
//! - **monaural** — one independent stack;
//! - **bilateral** — two fully independent stacks, one per ear;
//! - **fused** — per-side stacks joined by two Hadamard fusion stages: the
//!   encoder outputs are fused and fed to both separators, and the
//!   separator outputs are fused and fed to both maskers, while each
//!   side's envelope detector stays private. This is what makes the two
//!   output sides differ while still sharing information.

mod loss;
mod model;
mod params;
mod train;

pub use loss::{model_loss, selection_mask, LossBreakdown, LossTargets};
pub use model::{forward_bilateral, forward_monaural, fuse, BoundModel, SideOutput};
pub use params::{ModelParams, Variant};
pub use train::{
    fit, fit_with_init, EpochStats, FitOutcome, ScheduleDecision, StopReason, TrainConfig,
    TrainExample, TrainSchedule,
};

use crate::{Error, Result};

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    /// Encoder filter count (F).
    pub encoder_filters: usize,
    /// Encoder filter length in samples (L).
    pub filter_len: usize,
    /// Bottleneck channels entering the separator (B).
    pub bottleneck: usize,
    /// Hidden channels inside a separator block (H).
    pub hidden: usize,
    /// Skip-connection channels, the separator output width (S).
    pub skip: usize,
    /// Convolution kernel size inside the separator and envelope detector
    /// (P, odd so same-padding preserves the frame count).
    pub kernel: usize,
    /// Dilated blocks per repeat (X); dilation doubles per block.
    pub blocks_per_repeat: usize,
    /// Repeats of the block stack (R).
    pub repeats: usize,
    /// Channel widths of the deep envelope detector; the last entry must
    /// equal `m_channels`.
    pub ded_channels: Vec<usize>,
    /// Electrode count (M).
    pub m_channels: usize,
    /// Encoder hop in samples; `sample_rate / stride` is the output frame
    /// rate, which must match the electrodogram CSR.
    pub stride: usize,
}

impl Default for ModelConfig {
    /// The published hyperparameter set: F=64, L=32, B=64, H=128, S=32,
    /// P=3, X=8, R=3, DED (128, 64, M), M=22, stride L/2.
    fn default() -> Self {
        ModelConfig {
            encoder_filters: 64,
            filter_len: 32,
            bottleneck: 64,
            hidden: 128,
            skip: 32,
            kernel: 3,
            blocks_per_repeat: 8,
            repeats: 3,
            ded_channels: vec![128, 64, 22],
            m_channels: 22,
            stride: 16,
        }
    }
}

impl ModelConfig {
    /// Desk-scale configuration for fast training-dynamics checks.
    pub fn reduced() -> Self {
        ModelConfig {
            encoder_filters: 8,
            filter_len: 8,
            bottleneck: 8,
            hidden: 16,
            skip: 8,
            kernel: 3,
            blocks_per_repeat: 2,
            repeats: 1,
            ded_channels: vec![16, 8, 4],
            m_channels: 4,
            stride: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("encoder_filters", self.encoder_filters),
            ("filter_len", self.filter_len),
            ("bottleneck", self.bottleneck),
            ("hidden", self.hidden),
            ("skip", self.skip),
            ("kernel", self.kernel),
            ("blocks_per_repeat", self.blocks_per_repeat),
            ("repeats", self.repeats),
            ("m_channels", self.m_channels),
            ("stride", self.stride),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::param(format!("{name} must be positive")));
            }
        }
        if self.stride > self.filter_len {
            return Err(Error::param(format!(
                "stride {} exceeds filter length {}",
                self.stride, self.filter_len
            )));
        }
        if self.kernel % 2 == 0 {
            return Err(Error::param(format!(
                "kernel size {} must be odd for frame-preserving padding",
                self.kernel
            )));
        }
        if self.ded_channels.is_empty() || self.ded_channels.iter().any(|&c| c == 0) {
            return Err(Error::param("ded_channels must be non-empty and positive"));
        }
        if *self.ded_channels.last().unwrap() != self.m_channels {
            return Err(Error::param(format!(
                "last ded channel count {} must equal m_channels {}",
                self.ded_channels.last().unwrap(),
                self.m_channels
            )));
        }
        Ok(())
    }

    /// Latent frame count the encoder yields for `len` input samples.
    pub fn latent_frames(&self, len: usize) -> Result<usize> {
        if len < self.filter_len {
            return Err(Error::shape(
                "encode",
                format!("input of {len} samples shorter than one {}-sample filter", self.filter_len),
            ));
        }
        Ok((len - self.filter_len) / self.stride + 1)
    }

    /// Separator receptive field in latent frames:
    /// `1 + (P-1) (2^X - 1) R`.
    pub fn receptive_field_latent(&self) -> usize {
        1 + (self.kernel - 1) * ((1 << self.blocks_per_repeat) - 1) * self.repeats
    }
}
