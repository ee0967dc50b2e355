//! WAV file I/O (PCM16 and 32-bit float, mono or stereo).

use std::path::Path;

use hound::{SampleFormat, WavSpec};

use super::SampleBuffer;
use crate::{Error, Result};

/// Output sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    Float32,
}

/// Reads a WAV file into a `SampleBuffer`.
///
/// PCM16 samples are scaled by `1/32768`; 32-bit float samples pass through.
/// Files with more than two channels are rejected.
pub fn read_wav(path: impl AsRef<Path>) -> Result<SampleBuffer> {
    let mut reader = hound::WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::ChannelCount {
            expected: 2,
            got: spec.channels as usize,
        });
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()?,
        (fmt, bits) => {
            return Err(Error::Parse {
                what: "wav",
                detail: format!("unsupported format {fmt:?}/{bits} bits; expected PCM16 or float32"),
            })
        }
    };

    let n_channels = spec.channels as usize;
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n_channels); n_channels];
    for (i, v) in interleaved.iter().enumerate() {
        channels[i % n_channels].push(*v);
    }
    match n_channels {
        1 => SampleBuffer::mono(channels.pop().unwrap(), spec.sample_rate),
        _ => {
            let right = channels.pop().unwrap();
            let left = channels.pop().unwrap();
            SampleBuffer::stereo(left, right, spec.sample_rate)
        }
    }
}

/// Writes a buffer as WAV. PCM16 clamps to `[-1, 1]` before quantizing.
pub fn write_wav(path: impl AsRef<Path>, buf: &SampleBuffer, format: WavFormat) -> Result<()> {
    let spec = WavSpec {
        channels: buf.channel_count() as u16,
        sample_rate: buf.rate(),
        bits_per_sample: match format {
            WavFormat::Pcm16 => 16,
            WavFormat::Float32 => 32,
        },
        sample_format: match format {
            WavFormat::Pcm16 => SampleFormat::Int,
            WavFormat::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec)?;
    for i in 0..buf.len() {
        for c in 0..buf.channel_count() {
            let v = buf.channel(c)[i];
            match format {
                WavFormat::Pcm16 => {
                    let q = (v.clamp(-1.0, 1.0) * 32767.0).round() as i16;
                    writer.write_sample(q)?;
                }
                WavFormat::Float32 => writer.write_sample(v as f32)?,
            }
        }
    }
    writer.finalize()?;
    Ok(())
}
