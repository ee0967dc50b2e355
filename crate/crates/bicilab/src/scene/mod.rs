//! Binaural scene synthesis.
//!
//! Spatializes a target and a noise source (spherical-head parametric model
//! or measured BRIRs), mixes them at a requested better-ear SNR, and
//! produces the paired clean/noisy stereo signals plus clean-reference
//! electrodograms that training and evaluation consume.

mod manifest;
mod mix;
mod render;

pub use manifest::{parse_manifest, parse_manifest_line, ManifestEntry, RendererSpec};
pub use mix::{mix_at_snr, MixResult};
pub use render::{render_brir, render_parametric};

use crate::ace::{ace_encode, AceOutput, LgfParams, PatientMap, Side};
use crate::dsp::{SampleBuffer, CANONICAL_RATE};
use crate::{Error, Result};

/// How a source is spatialized.
#[derive(Debug, Clone)]
pub enum Renderer {
    /// Spherical-head model: Woodworth ITD plus a broadband ILD.
    Parametric,
    /// Convolution with a measured stereo impulse response.
    Brir(SampleBuffer),
}

/// Declarative description of one noisy binaural scene.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub target: SampleBuffer,
    pub noise: SampleBuffer,
    /// Degrees; 0 = front, positive = right.
    pub target_azimuth: f64,
    pub noise_azimuth: f64,
    /// Better-ear SNR of the mix; `+inf` disables the noise entirely.
    pub snr_db: f64,
    pub renderer: Renderer,
}

impl SceneSpec {
    pub fn new(
        target: SampleBuffer,
        noise: SampleBuffer,
        target_azimuth: f64,
        noise_azimuth: f64,
        snr_db: f64,
        renderer: Renderer,
    ) -> Result<Self> {
        for (name, az) in [("target", target_azimuth), ("noise", noise_azimuth)] {
            if !(-90.0..=90.0).contains(&az) {
                return Err(Error::Scene(format!(
                    "{name} azimuth {az} outside [-90, 90] degrees"
                )));
            }
        }
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::Scene(format!("snr {snr_db} dB is not usable")));
        }
        for (name, buf) in [("target", &target), ("noise", &noise)] {
            if buf.channel_count() != 1 {
                return Err(Error::Scene(format!("{name} source must be mono")));
            }
            if buf.rate() != CANONICAL_RATE {
                return Err(Error::Scene(format!(
                    "{name} source at {} Hz; scenes are built at {CANONICAL_RATE} Hz",
                    buf.rate()
                )));
            }
        }
        Ok(SceneSpec {
            target,
            noise,
            target_azimuth,
            noise_azimuth,
            snr_db,
            renderer,
        })
    }
}

/// The four aligned channels of a rendered scene: the noisy mixture per ear
/// plus the target-only (clean) renders that the loss and the metrics
/// reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralPair {
    pub left: SampleBuffer,
    pub right: SampleBuffer,
    pub clean_left: SampleBuffer,
    pub clean_right: SampleBuffer,
}

impl BinauralPair {
    pub fn new(
        left: SampleBuffer,
        right: SampleBuffer,
        clean_left: SampleBuffer,
        clean_right: SampleBuffer,
    ) -> Result<Self> {
        let len = left.len();
        for (name, buf) in [
            ("right", &right),
            ("clean_left", &clean_left),
            ("clean_right", &clean_right),
        ] {
            if buf.len() != len {
                return Err(Error::Scene(format!(
                    "{name} length {} != left length {len}",
                    buf.len()
                )));
            }
        }
        Ok(BinauralPair {
            left,
            right,
            clean_left,
            clean_right,
        })
    }
}

/// A fully built scene: signals, the applied noise gain, and the clean
/// ACE references.
#[derive(Debug, Clone)]
pub struct Scene {
    pub pair: BinauralPair,
    /// Gain applied to the noise render to hit the requested SNR.
    pub noise_gain: f64,
    pub clean_egram_left: AceOutput,
    pub clean_egram_right: AceOutput,
}

/// Renders, mixes, and encodes the clean references for one scene.
pub fn build_scene(spec: &SceneSpec, map: &PatientMap, lgf: &LgfParams) -> Result<Scene> {
    let render = |src: &SampleBuffer, azimuth: f64| -> Result<(SampleBuffer, SampleBuffer)> {
        match &spec.renderer {
            Renderer::Parametric => render_parametric(src, azimuth),
            Renderer::Brir(ir) => render_brir(src, ir),
        }
    };
    let clean = render(&spec.target, spec.target_azimuth)?;
    let noise = render(&spec.noise, spec.noise_azimuth)?;
    let mixed = mix_at_snr(&clean, &noise, spec.snr_db)?;

    let clean_egram_left = ace_encode(&mixed.pair.clean_left, map, lgf, Side::Left)?;
    let clean_egram_right = ace_encode(&mixed.pair.clean_right, map, lgf, Side::Right)?;
    Ok(Scene {
        pair: mixed.pair,
        noise_gain: mixed.noise_gain,
        clean_egram_left,
        clean_egram_right,
    })
}
