//! Source spatialization: spherical-head parametric model and BRIR
//! convolution.

use crate::dsp::{convolve, SampleBuffer};
use crate::{Error, Result};

/// Head radius of the spherical model, meters.
const HEAD_RADIUS_M: f64 = 0.0875;
/// Speed of sound, m/s.
const SPEED_OF_SOUND: f64 = 343.0;
/// Broadband interaural level difference at 90 degrees, dB.
const ILD_MAX_DB: f64 = 6.0;

/// Half-width of the fractional-delay interpolation kernel.
const DELAY_HALF_WIDTH: isize = 24;

/// Spatializes a mono source with the spherical-head model.
///
/// The far ear receives the Woodworth interaural time difference
/// `tau = (a/c) (theta + sin theta)` as a fractional delay plus a broadband
/// level difference of `6 sin theta` dB. Azimuth 0 is straight ahead
/// (both ears get the source unchanged); positive azimuths are on the
/// right, so the left ear is far.
pub fn render_parametric(
    src: &SampleBuffer,
    azimuth_deg: f64,
) -> Result<(SampleBuffer, SampleBuffer)> {
    if !(-90.0..=90.0).contains(&azimuth_deg) {
        return Err(Error::Scene(format!(
            "azimuth {azimuth_deg} outside [-90, 90] degrees"
        )));
    }
    let mono = src.as_mono()?;

    if azimuth_deg == 0.0 {
        let near = SampleBuffer::mono(mono.to_vec(), src.rate())?;
        return Ok((near.clone(), near));
    }

    let theta = azimuth_deg.abs().to_radians();
    let itd_seconds = HEAD_RADIUS_M / SPEED_OF_SOUND * (theta + theta.sin());
    let delay_samples = itd_seconds * src.rate() as f64;
    let attenuation = 10f64.powf(-(ILD_MAX_DB * theta.sin()) / 20.0);

    let near = mono.to_vec();
    let mut far = fractional_delay(mono, delay_samples);
    for v in far.iter_mut() {
        *v *= attenuation;
    }

    let near = SampleBuffer::mono(near, src.rate())?;
    let far = SampleBuffer::mono(far, src.rate())?;
    // Positive azimuth: source on the right, left ear is far.
    if azimuth_deg > 0.0 {
        Ok((far, near))
    } else {
        Ok((near, far))
    }
}

/// Delays a signal by a possibly fractional number of samples, keeping the
/// output length equal to the input length.
fn fractional_delay(x: &[f64], delay: f64) -> Vec<f64> {
    let whole = delay.floor() as isize;
    let frac = delay - whole as f64;

    if frac.abs() < 1e-9 {
        // Pure integer shift; keep it exact.
        let mut y = vec![0.0; x.len()];
        for n in 0..x.len() {
            let j = n as isize - whole;
            if j >= 0 && (j as usize) < x.len() {
                y[n] = x[j as usize];
            }
        }
        return y;
    }

    // Windowed-sinc interpolation around the shifted read position,
    // normalized to unit DC gain.
    let mut taps = Vec::with_capacity((2 * DELAY_HALF_WIDTH + 2) as usize);
    let mut norm = 0.0;
    for k in -DELAY_HALF_WIDTH..=DELAY_HALF_WIDTH + 1 {
        let tau = k as f64 - frac;
        let w = hann_arg(tau / (DELAY_HALF_WIDTH as f64 + 1.0));
        let tap = sinc(tau) * w;
        norm += tap;
        taps.push(tap);
    }
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        let mut acc = 0.0;
        for (i, k) in (-DELAY_HALF_WIDTH..=DELAY_HALF_WIDTH + 1).enumerate() {
            let j = n as isize - whole - k;
            if j >= 0 && (j as usize) < x.len() {
                acc += taps[i] * x[j as usize];
            }
        }
        y[n] = acc / norm;
    }
    y
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn hann_arg(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * x).cos())
    }
}

/// Spatializes a mono source through a measured stereo impulse response:
/// each ear is the convolution of the source with that ear's BRIR channel.
pub fn render_brir(
    src: &SampleBuffer,
    brir: &SampleBuffer,
) -> Result<(SampleBuffer, SampleBuffer)> {
    if brir.channel_count() != 2 {
        return Err(Error::Scene(format!(
            "BRIR must be stereo, got {} channel(s)",
            brir.channel_count()
        )));
    }
    if brir.rate() != src.rate() {
        return Err(Error::Scene(format!(
            "BRIR rate {} != source rate {}",
            brir.rate(),
            src.rate()
        )));
    }
    src.as_mono()?;
    let left = convolve(src, brir.channel(0))?;
    let right = convolve(src, brir.channel(1))?;
    Ok((left, right))
}
