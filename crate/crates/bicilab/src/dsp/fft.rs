//! Iterative radix-2 FFT, power-of-two sizes only.
//!
//! The artifact needs exactly one analysis size (128) plus larger
//! power-of-two transforms for fast convolution, so a self-contained
//! radix-2 kernel keeps the numeric path fully under test against the
//! naive-DFT oracle.

use crate::{Error, Result};

/// In-place complex radix-2 DIT FFT.
///
/// `re`/`im` must have equal power-of-two lengths. `inverse` applies the
/// conjugate transform including the `1/n` scale.
pub fn fft_complex(re: &mut [f64], im: &mut [f64], inverse: bool) -> Result<()> {
    let n = re.len();
    if n != im.len() {
        return Err(Error::shape(
            "fft_complex",
            format!("re length {} != im length {}", n, im.len()),
        ));
    }
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::FftLength(n));
    }
    if n == 1 {
        return Ok(());
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let (w_re, w_im) = (ang.cos(), ang.sin());
        for start in (0..n).step_by(len) {
            let mut cur_re = 1.0;
            let mut cur_im = 0.0;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let t_re = re[b] * cur_re - im[b] * cur_im;
                let t_im = re[b] * cur_im + im[b] * cur_re;
                re[b] = re[a] - t_re;
                im[b] = im[a] - t_im;
                re[a] += t_re;
                im[a] += t_im;
                let next_re = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = next_re;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
    Ok(())
}

/// Inverse complex FFT (includes the `1/n` scale).
pub fn ifft_complex(re: &mut [f64], im: &mut [f64]) -> Result<()> {
    fft_complex(re, im, true)
}

/// Magnitudes of the non-negative-frequency DFT bins of a real frame.
///
/// For a frame of `2^k` samples the result holds `2^(k-1) + 1` values,
/// bin `b` being `|DFT_b|`. Rejects non-power-of-two lengths.
pub fn fft_magnitude(frame: &[f64]) -> Result<Vec<f64>> {
    let n = frame.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::FftLength(n));
    }
    let mut re = frame.to_vec();
    let mut im = vec![0.0; n];
    fft_complex(&mut re, &mut im, false)?;
    Ok((0..=n / 2).map(|b| re[b].hypot(im[b])).collect())
}
