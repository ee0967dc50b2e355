use super::*;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Brute-force O(n^2) DFT magnitude oracle.
fn naive_dft_magnitude(frame: &[f64]) -> Vec<f64> {
    let n = frame.len();
    (0..=n / 2)
        .map(|b| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (i, &x) in frame.iter().enumerate() {
                let ang = -2.0 * std::f64::consts::PI * (b * i) as f64 / n as f64;
                re += x * ang.cos();
                im += x * ang.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Brute-force double-loop convolution oracle (same truncation as `convolve`).
fn naive_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        for (j, &hj) in h.iter().enumerate() {
            if n >= j {
                y[n] += hj * x[n - j];
            }
        }
    }
    y
}

fn sine(freq: f64, rate: u32, seconds: f64, amplitude: f64) -> Vec<f64> {
    let n = (seconds * rate as f64).round() as usize;
    (0..n)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
        .collect()
}

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

mod buffer {
    use super::*;

    #[test]
    fn rejects_non_finite_samples() {
        let err = SampleBuffer::mono(vec![0.0, f64::NAN], 16_000).unwrap_err();
        assert!(matches!(err, crate::Error::NonFiniteSample { index: 1, .. }));
    }

    #[test]
    fn rejects_zero_rate() {
        assert!(SampleBuffer::mono(vec![0.0], 0).is_err());
    }

    #[test]
    fn rejects_unequal_channel_lengths() {
        assert!(SampleBuffer::stereo(vec![0.0; 3], vec![0.0; 4], 16_000).is_err());
    }
}

mod fft {
    use super::*;

    #[test]
    fn zero_frame_gives_zero_magnitudes() {
        let mags = fft_magnitude(&vec![0.0; 128]).unwrap();
        assert_eq!(mags.len(), 65);
        assert!(mags.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn pure_cosine_at_bin_8_concentrates_there() {
        // Closed form: unit cosine at bin b of an n-point rectangular frame
        // has |DFT_b| = n/2.
        let n = 128;
        let frame: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 8.0 * i as f64 / n as f64).cos())
            .collect();
        let mags = fft_magnitude(&frame).unwrap();
        assert!((mags[8] - 64.0).abs() < 1e-9);
        for (b, &m) in mags.iter().enumerate() {
            if b != 8 {
                assert!(m < 1e-9, "bin {b} = {m}");
            }
        }
    }

    #[test]
    fn matches_naive_dft_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let frame = random_signal(&mut rng, 128);
            let fast = fft_magnitude(&frame).unwrap();
            let slow = naive_dft_magnitude(&frame);
            for (f, s) in fast.iter().zip(&slow) {
                assert!((f - s).abs() <= 1e-9 * s.abs().max(1.0));
            }
        }
    }

    #[test]
    fn parseval_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frame = random_signal(&mut rng, 128);
        let n = frame.len() as f64;
        let time_energy: f64 = frame.iter().map(|x| x * x).sum();
        let mut re = frame.clone();
        let mut im = vec![0.0; frame.len()];
        fft_complex(&mut re, &mut im, false).unwrap();
        let freq_energy: f64 =
            re.iter().zip(&im).map(|(r, i)| r * r + i * i).sum::<f64>() / n;
        assert!((time_energy - freq_energy).abs() < 1e-9 * time_energy);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            fft_magnitude(&vec![0.0; 100]),
            Err(crate::Error::FftLength(100))
        ));
    }

    #[test]
    fn ifft_inverts_fft() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let orig = random_signal(&mut rng, 256);
        let mut re = orig.clone();
        let mut im = vec![0.0; 256];
        fft_complex(&mut re, &mut im, false).unwrap();
        ifft_complex(&mut re, &mut im).unwrap();
        for (a, b) in re.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

mod framing {
    use super::*;

    #[test]
    fn boundary_one_frame() {
        let buf = SampleBuffer::mono(vec![0.5; 128], 16_000).unwrap();
        let spec = FrameSpec::new(128, 16, Window::Rect).unwrap();
        assert_eq!(frame_signal(&buf, &spec).unwrap().len(), 1);
    }

    #[test]
    fn len_160_gives_three_frames() {
        let buf = SampleBuffer::mono(vec![0.5; 160], 16_000).unwrap();
        let spec = FrameSpec::new(128, 16, Window::Rect).unwrap();
        assert_eq!(frame_signal(&buf, &spec).unwrap().len(), 3);
    }

    #[test]
    fn short_buffer_yields_empty_output() {
        let buf = SampleBuffer::mono(vec![0.5; 100], 16_000).unwrap();
        let spec = FrameSpec::new(128, 16, Window::Hann).unwrap();
        assert!(frame_signal(&buf, &spec).unwrap().is_empty());
    }

    #[test]
    fn constant_input_with_hann_equals_window() {
        let buf = SampleBuffer::mono(vec![1.0; 128], 16_000).unwrap();
        let spec = FrameSpec::new(128, 128, Window::Hann).unwrap();
        let frames = frame_signal(&buf, &spec).unwrap();
        assert_eq!(frames, vec![Window::Hann.coefficients(128)]);
    }

    #[test]
    fn rejects_hop_larger_than_frame() {
        assert!(FrameSpec::new(128, 129, Window::Hann).is_err());
        assert!(FrameSpec::new(128, 0, Window::Hann).is_err());
    }

    proptest! {
        #[test]
        fn frame_count_formula_holds(len in 1usize..4000, frame_len in 1usize..256, hop in 1usize..256) {
            prop_assume!(hop <= frame_len);
            prop_assume!(len >= frame_len);
            let buf = SampleBuffer::mono(vec![0.1; len], 16_000).unwrap();
            let spec = FrameSpec::new(frame_len, hop, Window::Rect).unwrap();
            let frames = frame_signal(&buf, &spec).unwrap();
            prop_assert_eq!(frames.len(), (len - frame_len) / hop + 1);
        }
    }
}

mod convolution {
    use super::*;

    #[test]
    fn unit_kernel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_signal(&mut rng, 64);
        let buf = SampleBuffer::mono(x.clone(), 16_000).unwrap();
        let y = convolve(&buf, &[1.0]).unwrap();
        assert_eq!(y.channel(0), x.as_slice());
    }

    #[test]
    fn delay_kernel_shifts_by_one() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let buf = SampleBuffer::mono(x, 16_000).unwrap();
        let y = convolve(&buf, &[0.0, 1.0]).unwrap();
        assert_eq!(y.channel(0), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn matches_direct_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_signal(&mut rng, 64);
        let h = random_signal(&mut rng, 8);
        let buf = SampleBuffer::mono(x.clone(), 16_000).unwrap();
        let y = convolve(&buf, &h).unwrap();
        let oracle = naive_convolve(&x, &h);
        for (a, b) in y.channel(0).iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_path_matches_direct_path() {
        // 300 taps crosses the FFT threshold.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_signal(&mut rng, 1000);
        let h = random_signal(&mut rng, 300);
        let buf = SampleBuffer::mono(x.clone(), 16_000).unwrap();
        let y = convolve(&buf, &h).unwrap();
        let oracle = naive_convolve(&x, &h);
        for (a, b) in y.channel(0).iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_empty_kernel() {
        let buf = SampleBuffer::mono(vec![0.0; 8], 16_000).unwrap();
        assert!(convolve(&buf, &[]).is_err());
    }

    proptest! {
        #[test]
        fn linearity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_signal(&mut rng, 48);
            let y = random_signal(&mut rng, 48);
            let h = random_signal(&mut rng, 6);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let combo: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| a * xi + b * yi).collect();

            let conv = |s: &[f64]| {
                convolve(&SampleBuffer::mono(s.to_vec(), 16_000).unwrap(), &h)
                    .unwrap()
                    .channel(0)
                    .to_vec()
            };
            let lhs = conv(&combo);
            let cx = conv(&x);
            let cy = conv(&y);
            for i in 0..lhs.len() {
                let rhs = a * cx[i] + b * cy[i];
                prop_assert!((lhs[i] - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
            }
        }
    }
}

mod resampling {
    use super::*;

    #[test]
    fn equal_rates_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_signal(&mut rng, 100);
        let buf = SampleBuffer::mono(x, 16_000).unwrap();
        let out = resample(&buf, 16_000).unwrap();
        assert_eq!(out, buf);
    }

    #[test]
    fn sine_peak_survives_downsampling() {
        // 32 kHz, 1 s, 1 kHz sinusoid -> 16 kHz, 16000 samples, dominant
        // FFT bin at 1 kHz.
        let buf = SampleBuffer::mono(sine(1000.0, 32_000, 1.0, 0.5), 32_000).unwrap();
        let out = resample(&buf, 16_000).unwrap();
        assert_eq!(out.len(), 16_000);
        assert_eq!(out.rate(), 16_000);

        let n = 4096;
        let mags = fft_magnitude(&out.channel(0)[1000..1000 + n]).unwrap();
        let peak = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let peak_hz = peak as f64 * 16_000.0 / n as f64;
        assert!((peak_hz - 1000.0).abs() < 8.0, "peak at {peak_hz} Hz");
    }

    #[test]
    fn length_ratio_arithmetic() {
        let buf = SampleBuffer::mono(vec![0.0; 4410], 44_100).unwrap();
        let out = resample(&buf, 16_000).unwrap();
        assert!((out.len() as i64 - 1600).abs() <= 1, "len {}", out.len());
    }

    #[test]
    fn alias_rejection_exceeds_60_db() {
        // A 9 kHz tone at 32 kHz lies above the 16 kHz target Nyquist; after
        // resampling, whatever leaks through folds to 7 kHz. Compare output
        // RMS against the input tone amplitude.
        let amp = 0.5;
        let buf = SampleBuffer::mono(sine(9_000.0, 32_000, 1.0, amp), 32_000).unwrap();
        let out = resample(&buf, 16_000).unwrap();
        let body = &out.channel(0)[1000..15_000];
        let rms = (body.iter().map(|v| v * v).sum::<f64>() / body.len() as f64).sqrt();
        let rejection_db = 20.0 * (amp / 2f64.sqrt() / rms.max(1e-300)).log10();
        assert!(rejection_db > 60.0, "alias rejection {rejection_db:.1} dB");
    }

    #[test]
    fn passband_gain_is_flat() {
        let amp = 0.5;
        let buf = SampleBuffer::mono(sine(1000.0, 48_000, 0.5, amp), 48_000).unwrap();
        let out = resample(&buf, 16_000).unwrap();
        let body = &out.channel(0)[1000..7000];
        let rms = (body.iter().map(|v| v * v).sum::<f64>() / body.len() as f64).sqrt();
        let expected = amp / 2f64.sqrt();
        assert!((rms - expected).abs() < 0.01 * expected, "rms {rms}");
    }

    #[test]
    fn upsampling_preserves_duration() {
        let buf = SampleBuffer::mono(sine(440.0, 16_000, 0.25, 0.3), 16_000).unwrap();
        let out = resample(&buf, 48_000).unwrap();
        assert_eq!(out.len(), 12_000);
    }

    #[test]
    fn deterministic() {
        let buf = SampleBuffer::mono(sine(750.0, 44_100, 0.2, 0.4), 44_100).unwrap();
        let a = resample(&buf, 16_000).unwrap();
        let b = resample(&buf, 16_000).unwrap();
        assert_eq!(a, b);
    }
}

mod wav_io {
    use super::*;
    use crate::dsp::wav::{read_wav, write_wav, WavFormat};

    #[test]
    fn float32_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let buf =
            SampleBuffer::stereo(vec![0.99, -0.5, 0.25], vec![0.1, 0.2, -0.3], 16_000).unwrap();
        write_wav(&path, &buf, WavFormat::Float32).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.rate(), 16_000);
        assert_eq!(back.channel_count(), 2);
        for c in 0..2 {
            for (a, b) in back.channel(c).iter().zip(buf.channel(c)) {
                assert!((a - b).abs() < 1e-7); // f32 quantization
            }
        }
    }

    #[test]
    fn pcm16_round_trip_quantizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let buf = SampleBuffer::mono(vec![0.0, 0.5, -0.5, 1.0, -1.0], 16_000).unwrap();
        write_wav(&path, &buf, WavFormat::Pcm16).unwrap();
        let back = read_wav(&path).unwrap();
        for (a, b) in back.channel(0).iter().zip(buf.channel(0)) {
            assert!((a - b).abs() < 1.0 / 32_000.0);
        }
    }
}
