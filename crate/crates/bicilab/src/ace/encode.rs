//! N-of-M selection, loudness growth compression, current mapping, and the
//! full ACE encoding chain.

use super::{band_envelopes, CurrentFrame, Electrodogram, LgfParams, PatientMap, Side};
use crate::dsp::{frame_signal, FrameSpec, SampleBuffer, Window};
use crate::{Error, Result};

/// Analysis frame length of the clinical chain.
pub const ANALYSIS_LEN: usize = 128;

/// Picks the `n` most energetic envelopes of a frame.
///
/// Returns a 0/1 mask with exactly `n` ones when at least `n` entries are
/// positive, otherwise one per positive entry. Ties break toward the lower
/// (more apical) channel index.
pub fn select_n_of_m(envelope_frame: &[f64], n: usize) -> Vec<bool> {
    let m = envelope_frame.len();
    debug_assert!(n <= m, "selection count exceeds channel count");
    let mut order: Vec<usize> = (0..m).collect();
    // Stable sort by descending amplitude keeps the lowest index first
    // among equals.
    order.sort_by(|&a, &b| envelope_frame[b].total_cmp(&envelope_frame[a]));
    let mut mask = vec![false; m];
    for &k in order.iter().take(n) {
        if envelope_frame[k] > 0.0 {
            mask[k] = true;
        }
    }
    mask
}

/// Loudness growth function: compresses an envelope into `p` in `[0, 1]`.
///
/// `p = log(1 + rho (e - base)/(sat - base)) / log(1 + rho)`, with hard
/// clipping to 0 at or below the base level and to 1 at or above
/// saturation. Strictly increasing in between.
pub fn lgf_compress(e: f64, params: &LgfParams) -> f64 {
    let LgfParams {
        base_level,
        saturation_level,
        rho,
    } = *params;
    if e <= base_level {
        return 0.0;
    }
    if e >= saturation_level {
        return 1.0;
    }
    let x = (e - base_level) / (saturation_level - base_level);
    (rho * x).ln_1p() / rho.ln_1p()
}

/// Maps compressed amplitudes into the patient's dynamic range.
///
/// Selected channel `k` gets `round(threshold_k + p_k (comfort_k -
/// threshold_k))` current units; unselected channels get zero. The active
/// set lists selected electrodes in stimulation order, base to apex
/// (highest-frequency channel first).
pub fn map_to_current(
    p_frame: &[f64],
    mask: &[bool],
    map: &PatientMap,
) -> Result<CurrentFrame> {
    if p_frame.len() != map.m_channels || mask.len() != map.m_channels {
        return Err(Error::shape(
            "map_to_current",
            format!(
                "frame of {} channels, mask of {}, map of {}",
                p_frame.len(),
                mask.len(),
                map.m_channels
            ),
        ));
    }
    let mut levels = vec![0u32; map.m_channels];
    let mut active_set = Vec::new();
    for k in (0..map.m_channels).rev() {
        if mask[k] {
            let t = map.thresholds[k] as f64;
            let c = map.comforts[k] as f64;
            levels[k] = (t + p_frame[k] * (c - t)).round() as u32;
            active_set.push(k);
        }
    }
    Ok(CurrentFrame { levels, active_set })
}

/// Result of running the full ACE chain over a signal.
#[derive(Debug, Clone)]
pub struct AceOutput {
    pub electrodogram: Electrodogram,
    pub current_frames: Vec<CurrentFrame>,
}

/// Encodes a mono 16 kHz signal with the clinical ACE chain.
///
/// The analysis hop is `rate / csr` samples (16 at 1,000 pps), and the tail
/// is zero-padded by `frame_len - hop` samples so the electrodogram frame
/// rate equals the CSR exactly: `T = floor(len * csr / rate)`. Band
/// envelopes are normalized by `2 / sum(window)` so that a full-scale
/// sinusoid at a band center reaches an envelope of about 1.0, the scale
/// the default LGF constants assume.
pub fn ace_encode(
    buf: &SampleBuffer,
    map: &PatientMap,
    lgf: &LgfParams,
    side: Side,
) -> Result<AceOutput> {
    let samples = buf.as_mono()?;
    let rate = buf.rate();
    if rate % map.csr != 0 {
        return Err(Error::param(format!(
            "csr {} does not divide the sample rate {}",
            map.csr, rate
        )));
    }
    let hop = (rate / map.csr) as usize;
    if hop > ANALYSIS_LEN {
        return Err(Error::param(format!(
            "hop {hop} exceeds the {ANALYSIS_LEN}-sample analysis frame"
        )));
    }
    let spec = FrameSpec::new(ANALYSIS_LEN, hop, Window::Hann)?;

    let mut padded = samples.to_vec();
    padded.resize(samples.len() + ANALYSIS_LEN - hop, 0.0);
    let padded = SampleBuffer::mono(padded, rate)?;
    let frames = frame_signal(&padded, &spec)?;

    let window_sum: f64 = Window::Hann.coefficients(ANALYSIS_LEN).iter().sum();
    let env_scale = 2.0 / window_sum;

    let envelopes = band_envelopes(&frames, map.m_channels)?;
    let t_frames = frames.len();

    let mut rows = vec![vec![0.0; t_frames]; map.m_channels];
    let mut current_frames = Vec::with_capacity(t_frames);
    for t in 0..t_frames {
        let env_frame: Vec<f64> = (0..map.m_channels)
            .map(|k| envelopes[k][t] * env_scale)
            .collect();
        let mask = select_n_of_m(&env_frame, map.n_select);
        let mut p_frame = vec![0.0; map.m_channels];
        for k in 0..map.m_channels {
            if mask[k] {
                p_frame[k] = lgf_compress(env_frame[k], lgf);
                rows[k][t] = p_frame[k];
            }
        }
        current_frames.push(map_to_current(&p_frame, &mask, map)?);
    }

    Ok(AceOutput {
        electrodogram: Electrodogram::from_rows(rows, map.csr, side)?,
        current_frames,
    })
}
