use super::*;
use crate::dsp::{frame_signal, FrameSpec, SampleBuffer, Window};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn tone(freq: f64, amplitude: f64, seconds: f64) -> SampleBuffer {
    let rate = 16_000u32;
    let n = (seconds * rate as f64) as usize;
    let samples = (0..n)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
        .collect();
    SampleBuffer::mono(samples, rate).unwrap()
}

mod band_tables {
    use super::*;

    #[test]
    fn tables_cover_58_bins_from_bin_2() {
        for &m in SUPPORTED_CHANNEL_COUNTS {
            let table = band_table(m).unwrap();
            assert_eq!(table.channels(), m);
            assert_eq!(table.bin_range(0).0, 2);
            assert_eq!(table.bin_range(m - 1).1, 60); // last covered bin is 59
        }
    }

    #[test]
    fn unsupported_channel_count_lists_supported() {
        let err = band_table(16).unwrap_err();
        match err {
            crate::Error::UnsupportedChannels { got, supported } => {
                assert_eq!(got, 16);
                assert_eq!(supported, &[20, 22]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn silence_gives_all_zero_envelopes() {
        let buf = SampleBuffer::mono(vec![0.0; 1600], 16_000).unwrap();
        let spec = FrameSpec::new(128, 16, Window::Hann).unwrap();
        let frames = frame_signal(&buf, &spec).unwrap();
        let env = band_envelopes(&frames, 22).unwrap();
        assert!(env.iter().all(|row| row.iter().all(|&e| e == 0.0)));
    }

    #[test]
    fn tone_peaks_in_the_band_containing_its_frequency() {
        // Band-table lookup oracle: 1 kHz sits in FFT bin 8 (125 Hz bins).
        let buf = tone(1000.0, 0.5, 0.1);
        let spec = FrameSpec::new(128, 16, Window::Hann).unwrap();
        let frames = frame_signal(&buf, &spec).unwrap();
        let env = band_envelopes(&frames, 22).unwrap();
        let means: Vec<f64> = env
            .iter()
            .map(|row| row.iter().sum::<f64>() / row.len() as f64)
            .collect();
        let argmax = (0..22).max_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap();
        let expected = band_table(22)
            .unwrap()
            .channel_for_frequency(1000.0, 16_000, 128)
            .unwrap();
        assert_eq!(argmax, expected);
    }

    #[test]
    fn white_noise_excites_every_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<f64> = (0..1600).map(|_| rng.random_range(-1.0..1.0)).collect();
        let buf = SampleBuffer::mono(samples, 16_000).unwrap();
        let spec = FrameSpec::new(128, 16, Window::Hann).unwrap();
        let frames = frame_signal(&buf, &spec).unwrap();
        let env = band_envelopes(&frames, 22).unwrap();
        assert!(env.iter().all(|row| row.iter().all(|&e| e > 0.0)));
    }
}

mod selection {
    use super::*;

    #[test]
    fn picks_the_two_largest() {
        let mask = select_n_of_m(&[0.9, 0.5, 0.3, 0.1], 2);
        assert_eq!(mask, vec![true, true, false, false]);
    }

    #[test]
    fn all_zero_envelopes_select_nothing() {
        let mask = select_n_of_m(&[0.0, 0.0, 0.0], 2);
        assert_eq!(mask, vec![false, false, false]);
    }

    #[test]
    fn tie_breaks_to_the_lowest_index() {
        let mask = select_n_of_m(&[0.5, 0.5, 0.2], 1);
        assert_eq!(mask, vec![true, false, false]);
    }

    #[test]
    fn fewer_positive_than_n_selects_only_positive() {
        let mask = select_n_of_m(&[0.0, 0.7, 0.0, 0.2], 3);
        assert_eq!(mask, vec![false, true, false, true]);
    }

    proptest! {
        /// Exactly-N: frames with >= n positive entries select exactly n.
        #[test]
        fn exactly_n(seed in 0u64..500, n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let frame: Vec<f64> = (0..22).map(|_| rng.random_range(0.01..1.0)).collect();
            let mask = select_n_of_m(&frame, n);
            prop_assert_eq!(mask.iter().filter(|&&b| b).count(), n);
        }

        /// Positive gain never changes the selection mask.
        #[test]
        fn gain_invariant(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let frame: Vec<f64> = (0..22).map(|_| rng.random_range(0.0..1.0)).collect();
            let gain = rng.random_range(0.001..100.0);
            let scaled: Vec<f64> = frame.iter().map(|e| e * gain).collect();
            prop_assert_eq!(select_n_of_m(&frame, 8), select_n_of_m(&scaled, 8));
        }
    }
}

mod lgf {
    use super::*;

    #[test]
    fn clips_at_base_and_saturation() {
        let p = LgfParams::default();
        assert_eq!(lgf_compress(p.base_level, &p), 0.0);
        assert_eq!(lgf_compress(p.base_level / 2.0, &p), 0.0);
        assert_eq!(lgf_compress(p.saturation_level, &p), 1.0);
        assert_eq!(lgf_compress(2.0, &p), 1.0);
    }

    #[test]
    fn midpoint_matches_closed_form() {
        // ln(1 + 208.1) / ln(1 + 416.2), evaluated independently.
        let p = LgfParams::default();
        let e = p.base_level + 0.5 * (p.saturation_level - p.base_level);
        let expected = (1.0 + 208.1f64).ln() / (1.0 + 416.2f64).ln();
        assert!((lgf_compress(e, &p) - expected).abs() < 1e-15);
        assert!((expected - 0.8855149428397908).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(LgfParams::new(0.5, 0.1, 416.2).is_err());
        assert!(LgfParams::new(0.0, 0.5, 416.2).is_err());
        assert!(LgfParams::new(0.1, 0.5, -1.0).is_err());
    }

    proptest! {
        /// Monotone and in [0,1] across the whole envelope axis.
        #[test]
        fn monotone_unit_range(e1 in 0.0f64..2.0, e2 in 0.0f64..2.0) {
            let p = LgfParams::default();
            let (p1, p2) = (lgf_compress(e1, &p), lgf_compress(e2, &p));
            prop_assert!((0.0..=1.0).contains(&p1));
            prop_assert!((0.0..=1.0).contains(&p2));
            if e1 < e2 {
                prop_assert!(p1 <= p2);
            }
        }
    }
}

mod current_mapping {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let map = PatientMap::default_lab();
        let mut p = vec![0.0; 22];
        let mut mask = vec![false; 22];
        p[3] = 0.0;
        p[4] = 1.0;
        p[5] = 0.5;
        mask[3] = true;
        mask[4] = true;
        mask[5] = true;
        let frame = map_to_current(&p, &mask, &map).unwrap();
        assert_eq!(frame.levels[3], 100); // threshold
        assert_eq!(frame.levels[4], 200); // comfort
        assert_eq!(frame.levels[5], 150); // midpoint
        assert_eq!(frame.levels[0], 0);
        // Base-to-apex: descending channel index.
        assert_eq!(frame.active_set, vec![5, 4, 3]);
    }

    #[test]
    fn rejects_channel_count_mismatch() {
        let map = PatientMap::default_lab();
        assert!(map_to_current(&[0.0; 20], &[false; 20], &map).is_err());
    }

    #[test]
    fn patient_map_invariants() {
        assert!(PatientMap::new(vec![100; 22], vec![99; 22], 8, 22, 1000).is_err());
        assert!(PatientMap::new(vec![100; 22], vec![200; 22], 0, 22, 1000).is_err());
        assert!(PatientMap::new(vec![100; 22], vec![200; 22], 23, 22, 1000).is_err());
    }
}

mod encoding {
    use super::*;

    #[test]
    fn four_seconds_of_silence() {
        let buf = SampleBuffer::mono(vec![0.0; 64_000], 16_000).unwrap();
        let out = ace_encode(&buf, &PatientMap::default_lab(), &LgfParams::default(), Side::Mono)
            .unwrap();
        assert_eq!(out.electrodogram.frames(), 4000);
        assert!(out.electrodogram.as_slice().iter().all(|&p| p == 0.0));
        assert!(out.current_frames.iter().all(|f| f.active_set.is_empty()));
    }

    #[test]
    fn tone_stimulates_exactly_n_channels_per_cycle() {
        // Independent oracle: band_envelopes + select_n_of_m applied to the
        // same frames must reproduce the encoder's selection; every voiced
        // frame stimulates exactly 8 channels including the 1 kHz band.
        let buf = tone(1000.0, 0.1, 1.0);
        let map = PatientMap::default_lab();
        let out = ace_encode(&buf, &map, &LgfParams::default(), Side::Mono).unwrap();
        assert_eq!(out.electrodogram.frames(), 1000);

        let mut padded = buf.channel(0).to_vec();
        padded.resize(buf.len() + 128 - 16, 0.0);
        let spec = FrameSpec::new(128, 16, Window::Hann).unwrap();
        let frames =
            frame_signal(&SampleBuffer::mono(padded, 16_000).unwrap(), &spec).unwrap();
        let env = band_envelopes(&frames, 22).unwrap();
        let tone_channel = band_table(22)
            .unwrap()
            .channel_for_frequency(1000.0, 16_000, 128)
            .unwrap();

        // Skip the windup/tail frames that straddle the signal edges.
        for t in 8..992 {
            let env_frame: Vec<f64> = (0..22).map(|k| env[k][t]).collect();
            let oracle_mask = select_n_of_m(&env_frame, 8);
            let frame = &out.current_frames[t];
            assert_eq!(frame.active_set.len(), 8, "frame {t}");
            assert!(frame.active_set.contains(&tone_channel), "frame {t}");
            for k in 0..22 {
                assert_eq!(oracle_mask[k], frame.levels[k] > 0, "frame {t} ch {k}");
            }
        }
    }

    #[test]
    fn encoding_is_deterministic() {
        let buf = tone(440.0, 0.2, 0.3);
        let map = PatientMap::default_lab();
        let lgf = LgfParams::default();
        let a = ace_encode(&buf, &map, &lgf, Side::Left).unwrap();
        let b = ace_encode(&buf, &map, &lgf, Side::Left).unwrap();
        assert_eq!(a.electrodogram, b.electrodogram);
        assert_eq!(a.current_frames, b.current_frames);
    }

    #[test]
    fn rejects_csr_not_dividing_rate() {
        let buf = tone(440.0, 0.2, 0.1);
        let map = PatientMap::new(vec![100; 22], vec![200; 22], 8, 22, 999).unwrap();
        assert!(ace_encode(&buf, &map, &LgfParams::default(), Side::Mono).is_err());
    }

    #[test]
    fn electrodogram_current_frame_consistency() {
        // level_k > 0 <=> mask selected; p recorded nonzero only on
        // selected channels (p may be 0 at threshold on a selected one).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples: Vec<f64> = (0..8000).map(|_| rng.random_range(-0.3..0.3)).collect();
        let buf = SampleBuffer::mono(samples, 16_000).unwrap();
        let map = PatientMap::default_lab();
        let out = ace_encode(&buf, &map, &LgfParams::default(), Side::Mono).unwrap();
        for t in 0..out.electrodogram.frames() {
            let frame = &out.current_frames[t];
            for k in 0..22 {
                let selected = frame.levels[k] > 0;
                let p = out.electrodogram.get(k, t);
                if p > 0.0 {
                    assert!(selected, "frame {t} ch {k}: p={p} on unselected channel");
                }
                if selected {
                    assert!(frame.levels[k] >= map.thresholds[k]);
                    assert!(frame.levels[k] <= map.comforts[k]);
                }
            }
        }
    }

    #[test]
    fn gain_leaves_selection_unchanged_and_scales_envelopes() {
        // Broadband input so every band carries real (not roundoff-floor)
        // energy and the per-frame argsort is well separated.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let samples: Vec<f64> = (0..3200).map(|_| rng.random_range(-0.2..0.2)).collect();
        let buf = SampleBuffer::mono(samples, 16_000).unwrap();
        let scaled =
            SampleBuffer::mono(buf.channel(0).iter().map(|s| s * 3.0).collect(), 16_000).unwrap();
        let spec = FrameSpec::new(128, 16, Window::Hann).unwrap();
        let env_a = band_envelopes(&frame_signal(&buf, &spec).unwrap(), 22).unwrap();
        let env_b = band_envelopes(&frame_signal(&scaled, &spec).unwrap(), 22).unwrap();
        let scale = env_b
            .iter()
            .flatten()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        for t in 0..env_a[0].len() {
            for k in 0..22 {
                assert!((env_b[k][t] - 3.0 * env_a[k][t]).abs() <= 1e-12 * scale);
            }
            let frame_a: Vec<f64> = (0..22).map(|k| env_a[k][t]).collect();
            let frame_b: Vec<f64> = (0..22).map(|k| env_b[k][t]).collect();
            assert_eq!(select_n_of_m(&frame_a, 8), select_n_of_m(&frame_b, 8));
        }
    }
}

mod egf_format {
    use super::*;

    fn random_egram(seed: u64, m: usize, t: usize) -> Electrodogram {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..t).map(|_| rng.random_range(0.0..=1.0)).collect())
            .collect();
        Electrodogram::from_rows(rows, 1000, Side::Left).unwrap()
    }

    #[test]
    fn header_and_shape() {
        let egram = random_egram(1, 22, 5);
        let mut bytes = Vec::new();
        write_egf_to(&egram, &mut bytes).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("EGF1 m=22 csr=1000 side=l frames=5\n"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn file_round_trip_is_byte_identical() {
        let egram = random_egram(2, 22, 40);
        let mut first = Vec::new();
        write_egf_to(&egram, &mut first).unwrap();
        let back = read_egf_from(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_egf_to(&back, &mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(back.channels(), 22);
        assert_eq!(back.frames(), 40);
        assert_eq!(back.side(), Side::Left);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_egf_from(&b"EGF2 m=1 csr=1 side=l frames=0\n"[..]).is_err());
        assert!(read_egf_from(&b"EGF1 m=2 csr=1000 side=l frames=1\n0.5\n"[..]).is_err());
        assert!(read_egf_from(&b"EGF1 m=1 csr=1000 side=x frames=0\n"[..]).is_err());
        assert!(read_egf_from(&b"EGF1 m=1 csr=1000 side=l frames=2\n0.5\n"[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_any_small_egram(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.random_range(1usize..6);
            let t = rng.random_range(0usize..10);
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..t).map(|_| rng.random_range(0.0..=1.0)).collect())
                .collect();
            let egram = Electrodogram::from_rows(rows, 500, Side::Right).unwrap();
            let mut first = Vec::new();
            write_egf_to(&egram, &mut first).unwrap();
            let back = read_egf_from(first.as_slice()).unwrap();
            let mut second = Vec::new();
            write_egf_to(&back, &mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
