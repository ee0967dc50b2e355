//! Linear convolution with the output truncated to the input length.

use super::fft::{fft_complex, ifft_complex};
use super::SampleBuffer;
use crate::{Error, Result};

/// Kernels at least this long take the FFT path.
const FFT_THRESHOLD: usize = 256;

/// Convolves every channel of `signal` with `kernel`.
///
/// The result is the full linear convolution truncated to the input length
/// ("same" alignment with the zero-delay origin at kernel index 0):
/// `y[n] = sum_j kernel[j] * x[n - j]`. Short kernels run direct in the
/// time domain; BRIR-scale kernels (>= 256 taps) go through FFT
/// convolution.
pub fn convolve(signal: &SampleBuffer, kernel: &[f64]) -> Result<SampleBuffer> {
    if kernel.is_empty() {
        return Err(Error::param("convolution kernel must be non-empty"));
    }
    if let Some(i) = kernel.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample {
            channel: 0,
            index: i,
            value: kernel[i],
        });
    }
    let mut out_channels = Vec::with_capacity(signal.channel_count());
    for c in 0..signal.channel_count() {
        let x = signal.channel(c);
        let y = if kernel.len() < FFT_THRESHOLD {
            convolve_direct(x, kernel)
        } else {
            convolve_fft(x, kernel)?
        };
        out_channels.push(y);
    }
    let rate = signal.rate();
    match out_channels.len() {
        1 => SampleBuffer::mono(out_channels.pop().unwrap(), rate),
        _ => {
            let right = out_channels.pop().unwrap();
            let left = out_channels.pop().unwrap();
            SampleBuffer::stereo(left, right, rate)
        }
    }
}

fn convolve_direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for (j, &hj) in h.iter().enumerate() {
        if hj == 0.0 {
            continue;
        }
        for n in j..x.len() {
            y[n] += hj * x[n - j];
        }
    }
    y
}

fn convolve_fft(x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let full = x.len() + h.len() - 1;
    let size = full.next_power_of_two();
    let mut x_re = vec![0.0; size];
    let mut x_im = vec![0.0; size];
    x_re[..x.len()].copy_from_slice(x);
    let mut h_re = vec![0.0; size];
    let mut h_im = vec![0.0; size];
    h_re[..h.len()].copy_from_slice(h);

    fft_complex(&mut x_re, &mut x_im, false)?;
    fft_complex(&mut h_re, &mut h_im, false)?;
    for i in 0..size {
        let re = x_re[i] * h_re[i] - x_im[i] * h_im[i];
        let im = x_re[i] * h_im[i] + x_im[i] * h_re[i];
        x_re[i] = re;
        x_im[i] = im;
    }
    ifft_complex(&mut x_re, &mut x_im)?;
    x_re.truncate(x.len());
    Ok(x_re)
}
