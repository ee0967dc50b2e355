//! Fixed FFT-bin-to-electrode band tables and envelope estimation.

use crate::{Error, Result};

/// Channel counts the band tables cover.
pub const SUPPORTED_CHANNEL_COUNTS: &[usize] = &[20, 22];

/// 22-channel grouping of 128-point FFT bins, apex (low frequency) first.
/// Starts at bin 2 and covers 58 bins (through bin 59, ~7.4 kHz).
const WIDTHS_22: [usize; 22] = [
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 4, 4, 5, 6, 7, 8,
];

/// 20-channel variant over the same bin span; the four highest groups of
/// the 22-channel table are merged pairwise (5+6 and 7+8).
const WIDTHS_20: [usize; 20] = [
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3, 4, 4, 11, 15,
];

const START_BIN: usize = 2;

/// Mapping from FFT bins to electrode bands.
#[derive(Debug, Clone, Copy)]
pub struct BandTable {
    start_bin: usize,
    widths: &'static [usize],
}

impl BandTable {
    pub fn channels(&self) -> usize {
        self.widths.len()
    }

    /// Half-open bin range `[start, end)` of channel `k`.
    pub fn bin_range(&self, k: usize) -> (usize, usize) {
        let start = self.start_bin + self.widths[..k].iter().sum::<usize>();
        (start, start + self.widths[k])
    }

    /// Channel whose bin range contains `freq_hz` at the given rate and FFT
    /// size, if any.
    pub fn channel_for_frequency(&self, freq_hz: f64, rate: u32, fft_len: usize) -> Option<usize> {
        let bin_hz = rate as f64 / fft_len as f64;
        let bin = (freq_hz / bin_hz).round() as usize;
        (0..self.channels()).find(|&k| {
            let (lo, hi) = self.bin_range(k);
            (lo..hi).contains(&bin)
        })
    }
}

/// Band table for the given electrode count; only 20 and 22 are defined.
pub fn band_table(m_channels: usize) -> Result<BandTable> {
    let widths: &'static [usize] = match m_channels {
        22 => &WIDTHS_22,
        20 => &WIDTHS_20,
        _ => {
            return Err(Error::UnsupportedChannels {
                got: m_channels,
                supported: SUPPORTED_CHANNEL_COUNTS,
            })
        }
    };
    Ok(BandTable {
        start_bin: START_BIN,
        widths,
    })
}

/// Per-band envelopes of a sequence of windowed 128-point frames.
///
/// Returns an M x T matrix (rows = channels); `E_k[t]` is the root sum of
/// squares of the FFT bin magnitudes inside band `k`.
pub fn band_envelopes(frames: &[Vec<f64>], m_channels: usize) -> Result<Vec<Vec<f64>>> {
    let table = band_table(m_channels)?;
    let mut envelopes = vec![Vec::with_capacity(frames.len()); m_channels];
    for frame in frames {
        let mags = crate::dsp::fft_magnitude(frame)?;
        for (k, env) in envelopes.iter_mut().enumerate() {
            let (lo, hi) = table.bin_range(k);
            let sq: f64 = mags[lo..hi].iter().map(|m| m * m).sum();
            env.push(sq.sqrt());
        }
    }
    Ok(envelopes)
}
