//! SNR mixing referenced at the better ear.

use super::BinauralPair;
use crate::dsp::SampleBuffer;
use crate::{Error, Result};

/// Output of [`mix_at_snr`]: the four-channel scene plus the single noise
/// gain that was applied (`noisy == clean + gain * noise`, sample-wise).
#[derive(Debug, Clone)]
pub struct MixResult {
    pub pair: BinauralPair,
    pub noise_gain: f64,
}

/// Mixes a rendered noise pair into a rendered target pair at `snr_db`.
///
/// One gain scales both noise ears, chosen so that the *better* ear (the
/// one with the higher target-to-noise power ratio) sits exactly at the
/// requested SNR; the other ear lands below it by whatever interaural
/// level difference the scene implies. The target is never rescaled and the
/// clean channels pass through untouched. Shorter operands are zero-padded
/// to the longer length. `snr_db = +inf` disables the noise (gain 0).
pub fn mix_at_snr(
    target: &(SampleBuffer, SampleBuffer),
    noise: &(SampleBuffer, SampleBuffer),
    snr_db: f64,
) -> Result<MixResult> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Scene(format!("snr {snr_db} dB is not usable")));
    }
    let rate = target.0.rate();
    for (name, buf) in [
        ("target right", &target.1),
        ("noise left", &noise.0),
        ("noise right", &noise.1),
    ] {
        if buf.rate() != rate {
            return Err(Error::Scene(format!(
                "{name} rate {} != target rate {rate}",
                buf.rate()
            )));
        }
    }

    let len = target
        .0
        .len()
        .max(target.1.len())
        .max(noise.0.len())
        .max(noise.1.len());
    let pad = |buf: &SampleBuffer| -> Vec<f64> {
        let mut v = buf.as_mono().map(<[f64]>::to_vec).unwrap_or_else(|_| buf.channel(0).to_vec());
        v.resize(len, 0.0);
        v
    };
    let t_l = pad(&target.0);
    let t_r = pad(&target.1);
    let n_l = pad(&noise.0);
    let n_r = pad(&noise.1);

    let power = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let (pt_l, pt_r) = (power(&t_l), power(&t_r));
    let (pn_l, pn_r) = (power(&n_l), power(&n_r));

    let gain = if snr_db == f64::INFINITY {
        0.0
    } else {
        if pt_l <= 0.0 && pt_r <= 0.0 {
            return Err(Error::Scene("target has zero power".into()));
        }
        if pn_l <= 0.0 || pn_r <= 0.0 {
            return Err(Error::Scene("noise has zero power at an ear".into()));
        }
        // The better ear maximizes target/noise power; a single gain puts
        // it exactly at the request.
        let best_ratio = (pt_l / pn_l).max(pt_r / pn_r);
        (best_ratio / 10f64.powf(snr_db / 10.0)).sqrt()
    };

    let mix = |t: &[f64], n: &[f64]| -> Vec<f64> {
        t.iter().zip(n).map(|(a, b)| a + gain * b).collect()
    };
    let pair = BinauralPair::new(
        SampleBuffer::mono(mix(&t_l, &n_l), rate)?,
        SampleBuffer::mono(mix(&t_r, &n_r), rate)?,
        SampleBuffer::mono(t_l, rate)?,
        SampleBuffer::mono(t_r, rate)?,
    )?;
    Ok(MixResult {
        pair,
        noise_gain: gain,
    })
}
