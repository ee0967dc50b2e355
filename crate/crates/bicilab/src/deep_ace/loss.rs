//! Training loss: reconstruction error on the amplitudes plus a selection
//! term on the masker logits, per listening side.

use super::model::SideOutput;
use crate::ace::AceOutput;
use crate::nn::Tensor;
use crate::{Error, Result};

/// Clean references for one side: target amplitudes and the 0/1 channel
/// selection mask, both `M x T` row-major.
#[derive(Debug, Clone)]
pub struct LossTargets {
    pub p_clean: Vec<f64>,
    pub selection: Vec<f64>,
    pub m: usize,
    pub t: usize,
}

impl LossTargets {
    /// Extracts targets from a clean ACE encode. The selection mask comes
    /// from the stimulated channels (level > 0), which disambiguates
    /// selected-at-threshold channels whose amplitude is exactly zero.
    pub fn from_ace(out: &AceOutput) -> LossTargets {
        let m = out.electrodogram.channels();
        let t = out.electrodogram.frames();
        LossTargets {
            p_clean: out.electrodogram.as_slice().to_vec(),
            selection: selection_mask(out),
            m,
            t,
        }
    }

    pub fn from_matrices(p_clean: Vec<f64>, selection: Vec<f64>, m: usize, t: usize) -> Result<Self> {
        if p_clean.len() != m * t || selection.len() != m * t {
            return Err(Error::shape(
                "loss targets",
                format!(
                    "{} amplitudes / {} mask entries for {m} x {t}",
                    p_clean.len(),
                    selection.len()
                ),
            ));
        }
        Ok(LossTargets {
            p_clean,
            selection,
            m,
            t,
        })
    }

    /// Column-truncated constant tensors of `frames` columns.
    fn tensors(&self, frames: usize) -> Result<(Tensor, Tensor)> {
        if frames > self.t {
            return Err(Error::shape(
                "loss targets",
                format!("{frames} frames requested, target holds {}", self.t),
            ));
        }
        let mut p = Vec::with_capacity(self.m * frames);
        let mut s = Vec::with_capacity(self.m * frames);
        for k in 0..self.m {
            p.extend_from_slice(&self.p_clean[k * self.t..k * self.t + frames]);
            s.extend_from_slice(&self.selection[k * self.t..k * self.t + frames]);
        }
        Ok((
            Tensor::constant(&[self.m, frames], p)?,
            Tensor::constant(&[self.m, frames], s)?,
        ))
    }
}

/// 0/1 row-major selection matrix from the stimulated channel sets.
pub fn selection_mask(out: &AceOutput) -> Vec<f64> {
    let m = out.electrodogram.channels();
    let t = out.electrodogram.frames();
    let mut mask = vec![0.0; m * t];
    for (ti, frame) in out.current_frames.iter().enumerate() {
        for k in 0..m {
            if frame.levels[k] > 0 {
                mask[k * t + ti] = 1.0;
            }
        }
    }
    mask
}

/// Per-side loss components and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub mse_left: f64,
    pub mse_right: f64,
    pub bce_left: f64,
    pub bce_right: f64,
    pub alpha: f64,
    pub total: f64,
}

/// Builds the scalar training loss: `MSE_l + MSE_r + alpha (BCE_l + BCE_r)`.
///
/// The clean references are truncated to the model's output frame count
/// (the model side is never longer than the ACE side at a matched frame
/// rate). Returns the differentiable total plus the numeric breakdown.
pub fn model_loss(
    left: &SideOutput,
    right: &SideOutput,
    targets_left: &LossTargets,
    targets_right: &LossTargets,
    alpha: f64,
) -> Result<(Tensor, LossBreakdown)> {
    let frames = left.p.shape()[1];
    if right.p.shape()[1] != frames {
        return Err(Error::shape(
            "model_loss",
            format!("left frames {} != right frames {}", frames, right.p.shape()[1]),
        ));
    }
    let (clean_l, mask_l) = targets_left.tensors(frames)?;
    let (clean_r, mask_r) = targets_right.tensors(frames)?;

    let mse_l = left.p.mse_loss(&clean_l)?;
    let mse_r = right.p.mse_loss(&clean_r)?;
    let bce_l = left.mask_logits.bce_with_logits(&mask_l)?;
    let bce_r = right.mask_logits.bce_with_logits(&mask_r)?;

    let total = mse_l
        .add(&mse_r)?
        .add(&bce_l.add(&bce_r)?.scale(alpha)?)?;
    let breakdown = LossBreakdown {
        mse_left: mse_l.item()?,
        mse_right: mse_r.item()?,
        bce_left: bce_l.item()?,
        bce_right: bce_r.item()?,
        alpha,
        total: total.item()?,
    };
    Ok((total, breakdown))
}
