//! Signal framing with pointwise windowing.

use super::{FrameSpec, SampleBuffer};
use crate::Result;

/// Slices a mono buffer into windowed frames.
///
/// Frame `t` covers samples `[t*hop, t*hop + frame_len)` with the window
/// applied pointwise; the count is `floor((len - frame_len)/hop) + 1`.
/// A buffer shorter than one frame yields an empty result (with a warning
/// rather than an error: silence shorter than the analysis window is a
/// legitimate degenerate input).
pub fn frame_signal(buf: &SampleBuffer, spec: &FrameSpec) -> Result<Vec<Vec<f64>>> {
    let samples = buf.as_mono()?;
    if samples.len() < spec.frame_len {
        log::warn!(
            "signal of {} samples is shorter than one {}-sample frame; no frames produced",
            samples.len(),
            spec.frame_len
        );
        return Ok(Vec::new());
    }
    let window = spec.window.coefficients(spec.frame_len);
    let count = spec.frame_count(samples.len());
    let mut frames = Vec::with_capacity(count);
    for t in 0..count {
        let start = t * spec.hop;
        let frame = samples[start..start + spec.frame_len]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        frames.push(frame);
    }
    Ok(frames)
}
