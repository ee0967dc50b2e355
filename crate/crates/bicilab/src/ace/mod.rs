//! The ACE (Advanced Combination Encoder) sound coding strategy.
//!
//! The clinical chain: 128-point windowed FFT analysis, per-band envelope
//! estimation, N-of-M maxima selection, loudness growth compression, and
//! patient-map current mapping. Its output, the [`Electrodogram`], is the
//! lingua franca of the whole crate: the deep models are trained against it
//! and the evaluation metrics operate on it.

mod bands;
mod egf;
mod encode;

pub use bands::{band_envelopes, band_table, BandTable, SUPPORTED_CHANNEL_COUNTS};
pub use egf::{read_egf, read_egf_from, write_egf, write_egf_to};
pub use encode::{ace_encode, lgf_compress, map_to_current, select_n_of_m, AceOutput};

use crate::{Error, Result};

/// Which listening side an electrodogram belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Mono,
}

impl Side {
    pub fn code(self) -> char {
        match self {
            Side::Left => 'l',
            Side::Right => 'r',
            Side::Mono => 'm',
        }
    }

    pub fn from_code(c: char) -> Option<Side> {
        match c {
            'l' => Some(Side::Left),
            'r' => Some(Side::Right),
            'm' => Some(Side::Mono),
            _ => None,
        }
    }
}

/// M x T matrix of normalized stimulation amplitudes `p_k[t]` in `[0, 1]`,
/// plus channel-count / stimulation-rate metadata.
///
/// Row `k` is the time series of channel `k`; channel 0 is the most apical
/// (lowest-frequency) electrode.
#[derive(Debug, Clone, PartialEq)]
pub struct Electrodogram {
    data: Vec<f64>, // row-major M x T
    m: usize,
    t: usize,
    csr: u32,
    side: Side,
}

impl Electrodogram {
    /// Builds from row-major data; every entry must lie in `[0, 1]`.
    pub fn new(data: Vec<f64>, m: usize, t: usize, csr: u32, side: Side) -> Result<Self> {
        if data.len() != m * t {
            return Err(Error::shape(
                "electrodogram",
                format!("data length {} != {m} x {t}", data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::param(format!(
                "electrodogram entry out of [0,1] at flat index {i}: {}",
                data[i]
            )));
        }
        Ok(Electrodogram { data, m, t, csr, side })
    }

    /// Builds from per-channel rows.
    pub fn from_rows(rows: Vec<Vec<f64>>, csr: u32, side: Side) -> Result<Self> {
        let m = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != t) {
            return Err(Error::shape("electrodogram", "ragged channel rows".to_string()));
        }
        Self::new(rows.into_iter().flatten().collect(), m, t, csr, side)
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    pub fn frames(&self) -> usize {
        self.t
    }

    pub fn csr(&self) -> u32 {
        self.csr
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Time series of channel `k`.
    pub fn channel(&self, k: usize) -> &[f64] {
        &self.data[k * self.t..(k + 1) * self.t]
    }

    pub fn get(&self, k: usize, t: usize) -> f64 {
        self.data[k * self.t + t]
    }

    /// Amplitudes of frame `t` across channels.
    pub fn frame(&self, t: usize) -> Vec<f64> {
        (0..self.m).map(|k| self.get(k, t)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy truncated to the first `frames` stimulation frames.
    pub fn truncated(&self, frames: usize) -> Electrodogram {
        let t = frames.min(self.t);
        let mut data = Vec::with_capacity(self.m * t);
        for k in 0..self.m {
            data.extend_from_slice(&self.channel(k)[..t]);
        }
        Electrodogram {
            data,
            m: self.m,
            t,
            csr: self.csr,
            side: self.side,
        }
    }
}

/// One stimulation cycle: per-electrode current levels in clinical current
/// units plus the base-to-apex stimulation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurrentFrame {
    /// Level per electrode; zero for unselected channels, otherwise within
    /// `[threshold, comfort]` of that electrode.
    pub levels: Vec<u32>,
    /// Selected electrode indices in stimulation order (base to apex, i.e.
    /// highest-frequency channel first).
    pub active_set: Vec<usize>,
}

/// Per-electrode fitting data driving band selection and current mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatientMap {
    pub thresholds: Vec<u32>,
    pub comforts: Vec<u32>,
    pub n_select: usize,
    pub m_channels: usize,
    /// Channel stimulation rate in pulses per second per channel.
    pub csr: u32,
}

impl PatientMap {
    pub fn new(
        thresholds: Vec<u32>,
        comforts: Vec<u32>,
        n_select: usize,
        m_channels: usize,
        csr: u32,
    ) -> Result<Self> {
        if thresholds.len() != m_channels || comforts.len() != m_channels {
            return Err(Error::shape(
                "patient map",
                format!(
                    "thresholds/comforts lengths {}/{} != m_channels {m_channels}",
                    thresholds.len(),
                    comforts.len()
                ),
            ));
        }
        if n_select == 0 || n_select > m_channels {
            return Err(Error::param(format!(
                "n_select must satisfy 1 <= N <= M, got N={n_select}, M={m_channels}"
            )));
        }
        if let Some(k) = (0..m_channels).find(|&k| comforts[k] < thresholds[k]) {
            return Err(Error::param(format!(
                "comfort {} below threshold {} on electrode {k}",
                comforts[k], thresholds[k]
            )));
        }
        if csr == 0 {
            return Err(Error::param("csr must be positive"));
        }
        Ok(PatientMap {
            thresholds,
            comforts,
            n_select,
            m_channels,
            csr,
        })
    }

    /// 8-of-22 at 1,000 pps with flat 100/200 threshold/comfort levels.
    pub fn default_lab() -> PatientMap {
        PatientMap::new(vec![100; 22], vec![200; 22], 8, 22, 1000).unwrap()
    }
}

/// Loudness growth function parameters.
///
/// Maps a band envelope onto a normalized stimulation amplitude:
/// `p = log(1 + rho (e - base)/(sat - base)) / log(1 + rho)`, clipped to 0
/// below `base_level` and to 1 above `saturation_level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgfParams {
    pub base_level: f64,
    pub saturation_level: f64,
    pub rho: f64,
}

impl LgfParams {
    pub fn new(base_level: f64, saturation_level: f64, rho: f64) -> Result<Self> {
        if !(base_level > 0.0 && saturation_level > base_level) || !rho.is_finite() || rho <= 0.0 {
            return Err(Error::param(format!(
                "lgf requires sat > base > 0 and rho > 0, got base={base_level}, \
                 sat={saturation_level}, rho={rho}"
            )));
        }
        Ok(LgfParams {
            base_level,
            saturation_level,
            rho,
        })
    }
}

impl Default for LgfParams {
    /// Common clinical defaults on the unit envelope scale: base 4/256,
    /// saturation 150/256, rho 416.2.
    fn default() -> Self {
        LgfParams {
            base_level: 4.0 / 256.0,
            saturation_level: 150.0 / 256.0,
            rho: 416.2,
        }
    }
}

#[cfg(test)]
mod tests;
