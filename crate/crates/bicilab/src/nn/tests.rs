use super::gradcheck::{max_relative_error, DEFAULT_H};
use super::ops::global_layer_norm;
use super::*;
use crate::Result;
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const OP_TOL: f64 = 1e-4;

fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Runs a finite-difference check: builds the loss via `f` from parameter
/// tensors with the given shapes, reads analytic grads, compares.
fn check_op(
    shapes: &[&[usize]],
    seed: u64,
    range: (f64, f64),
    f: impl Fn(&[Tensor]) -> Result<Tensor>,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point: Vec<Vec<f64>> = shapes
        .iter()
        .map(|s| random_vec(&mut rng, s.iter().product(), range.0, range.1))
        .collect();

    let leaves: Vec<Tensor> = shapes
        .iter()
        .zip(&point)
        .map(|(s, v)| Tensor::parameter(s, v.clone()).unwrap())
        .collect();
    let loss = f(&leaves).unwrap();
    backward(&loss).unwrap();
    let analytic: Vec<Vec<f64>> = leaves
        .iter()
        .map(|l| l.grad().expect("leaf gradient populated"))
        .collect();

    let mut eval = |vals: &[Vec<f64>]| -> Result<f64> {
        let leaves: Vec<Tensor> = shapes
            .iter()
            .zip(vals)
            .map(|(s, v)| Tensor::parameter(s, v.clone()).unwrap())
            .collect();
        f(&leaves)?.item()
    };
    let err = max_relative_error(&mut eval, &point, &analytic, DEFAULT_H, None).unwrap();
    assert!(err < OP_TOL, "max relative gradient error {err}");
}

mod engine {
    use super::*;

    #[test]
    fn sum_gradient_is_ones() {
        let x = Tensor::parameter(&[2, 3], vec![1.0, -2.0, 0.5, 3.0, 4.0, -1.0]).unwrap();
        let loss = x.sum_all().unwrap();
        backward(&loss).unwrap();
        assert_eq!(x.grad().unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn hadamard_gradient_is_the_other_operand() {
        let x = Tensor::parameter(&[1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = Tensor::parameter(&[1, 4], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let loss = x.mul(&y).unwrap().sum_all().unwrap();
        backward(&loss).unwrap();
        assert_eq!(x.grad().unwrap(), y.values());
        assert_eq!(y.grad().unwrap(), x.values());
    }

    #[test]
    fn shared_operand_accumulates_both_paths() {
        // loss = sum(x * x) => grad = 2x.
        let x = Tensor::parameter(&[1, 3], vec![1.0, -2.0, 3.0]).unwrap();
        let loss = x.mul(&x).unwrap().sum_all().unwrap();
        backward(&loss).unwrap();
        assert_eq!(x.grad().unwrap(), vec![2.0, -4.0, 6.0]);
    }

    #[test]
    fn backward_rejects_non_scalar_loss() {
        let x = Tensor::parameter(&[2, 2], vec![1.0; 4]).unwrap();
        let y = x.relu().unwrap();
        assert!(backward(&y).is_err());
    }

    #[test]
    fn ops_do_not_mutate_inputs() {
        let vals = vec![1.0, -2.0, 3.0, -4.0];
        let x = Tensor::parameter(&[2, 2], vals.clone()).unwrap();
        let _ = x.relu().unwrap();
        let _ = x.sigmoid().unwrap();
        let _ = x.scale(5.0).unwrap();
        let _ = x.mul(&x).unwrap();
        assert_eq!(x.values(), vals.as_slice());
    }

    #[test]
    fn non_finite_results_trip_a_diagnostic() {
        let x = Tensor::constant(&[1], vec![1.0]).unwrap();
        let zero = Tensor::constant(&[1], vec![0.0]).unwrap();
        assert!(x.div(&zero).is_err());
        assert!(Tensor::constant(&[1], vec![f64::NAN]).is_err());
    }

    #[test]
    fn shape_mismatches_name_dimensions() {
        let x = Tensor::constant(&[2, 3], vec![0.0; 6]).unwrap();
        let y = Tensor::constant(&[3, 2], vec![0.0; 6]).unwrap();
        let err = x.add(&y).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('3') && msg.contains('2'), "got: {msg}");
    }
}

mod values {
    use super::*;

    #[test]
    fn sigmoid_at_zero_is_half() {
        let x = Tensor::constant(&[1], vec![0.0]).unwrap();
        assert_eq!(x.sigmoid().unwrap().values(), &[0.5]);
    }

    #[test]
    fn prelu_definition() {
        let x = Tensor::constant(&[1, 2], vec![-2.0, 3.0]).unwrap();
        let a = Tensor::constant(&[1], vec![0.25]).unwrap();
        assert_eq!(x.prelu(&a).unwrap().values(), &[-0.5, 3.0]);
    }

    #[test]
    fn gln_of_constant_tensor_is_beta() {
        // 0.5 sums and divides exactly in binary floating point, so the
        // centered values are exactly zero and the eps guard yields beta.
        let x = Tensor::constant(&[3, 4], vec![0.5; 12]).unwrap();
        let gamma = Tensor::constant(&[3, 1], vec![2.0, 3.0, 4.0]).unwrap();
        let beta = Tensor::constant(&[3, 1], vec![-1.0, 0.25, 7.0]).unwrap();
        let y = global_layer_norm(&x, &gamma, &beta, 1e-8).unwrap();
        for c in 0..3 {
            for t in 0..4 {
                assert_eq!(y.values()[c * 4 + t], beta.values()[c]);
            }
        }
    }

    #[test]
    fn conv1d_identity_kernel() {
        let x = Tensor::constant(&[2, 5], (0..10).map(f64::from).collect()).unwrap();
        // K=1 identity matrix kernel.
        let w = Tensor::constant(&[2, 2, 1], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let y = x.conv1d(&w, 1, 1, 0, 1).unwrap();
        assert_eq!(y.values(), x.values());
    }

    #[test]
    fn conv1d_box_kernel_sums_windows() {
        let x = Tensor::constant(&[1, 8], vec![1.0; 8]).unwrap();
        let w = Tensor::constant(&[1, 1, 3], vec![1.0; 3]).unwrap();
        let y = x.conv1d(&w, 1, 1, 0, 1).unwrap();
        assert_eq!(y.shape(), &[1, 6]);
        assert_eq!(y.values(), &[3.0; 6]);
    }

    #[test]
    fn conv1d_output_length_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let t = rng.random_range(6usize..40);
            let k = rng.random_range(1usize..5);
            let stride = rng.random_range(1usize..4);
            let dilation = rng.random_range(1usize..3);
            let padding = rng.random_range(0usize..3);
            if t + 2 * padding < dilation * (k - 1) + 1 {
                continue;
            }
            let x = Tensor::constant(&[1, t], vec![0.0; t]).unwrap();
            let w = Tensor::constant(&[1, 1, k], vec![0.0; k]).unwrap();
            let y = x.conv1d(&w, stride, dilation, padding, 1).unwrap();
            let expected = (t + 2 * padding - dilation * (k - 1) - 1) / stride + 1;
            assert_eq!(y.shape(), &[1, expected]);
        }
    }

    #[test]
    fn conv1d_matches_triple_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for case in 0..20 {
            let (c_in, c_out, t, k) = (
                rng.random_range(1usize..4),
                rng.random_range(1usize..4),
                rng.random_range(5usize..20),
                rng.random_range(1usize..4),
            );
            let stride = rng.random_range(1usize..3);
            let dilation = rng.random_range(1usize..3);
            let padding = rng.random_range(0usize..3);
            if t + 2 * padding < dilation * (k - 1) + 1 {
                continue;
            }
            let xv = random_vec(&mut rng, c_in * t, -1.0, 1.0);
            let wv = random_vec(&mut rng, c_out * c_in * k, -1.0, 1.0);
            let x = Tensor::constant(&[c_in, t], xv.clone()).unwrap();
            let w = Tensor::constant(&[c_out, c_in, k], wv.clone()).unwrap();
            let y = x.conv1d(&w, stride, dilation, padding, 1).unwrap();

            let t_out = (t + 2 * padding - dilation * (k - 1) - 1) / stride + 1;
            for co in 0..c_out {
                for tt in 0..t_out {
                    let mut acc = 0.0;
                    for ci in 0..c_in {
                        for kk in 0..k {
                            let j = (tt * stride + kk * dilation) as isize - padding as isize;
                            if j >= 0 && (j as usize) < t {
                                acc += wv[(co * c_in + ci) * k + kk] * xv[ci * t + j as usize];
                            }
                        }
                    }
                    let got = y.values()[co * t_out + tt];
                    assert!((got - acc).abs() < 1e-12, "case {case}: {got} vs {acc}");
                }
            }
        }
    }

    #[test]
    fn grouped_conv_is_blockwise() {
        // groups=2: each output channel sees only its half of the inputs.
        let x = Tensor::constant(&[2, 4], vec![1.0, 2.0, 3.0, 4.0, 10.0, 20.0, 30.0, 40.0])
            .unwrap();
        let w = Tensor::constant(&[2, 1, 1], vec![1.0, 1.0]).unwrap();
        let y = x.conv1d(&w, 1, 1, 0, 2).unwrap();
        assert_eq!(y.values(), x.values());
    }

    #[test]
    fn transposed_identity_and_length() {
        let x = Tensor::constant(&[1, 3], vec![1.0, 2.0, 3.0]).unwrap();
        let w = Tensor::constant(&[1, 1, 1], vec![1.0]).unwrap();
        let y = x.conv1d_transposed(&w, 1).unwrap();
        assert_eq!(y.values(), x.values());

        let w2 = Tensor::constant(&[1, 1, 2], vec![1.0, 1.0]).unwrap();
        let y2 = x.conv1d_transposed(&w2, 2).unwrap();
        assert_eq!(y2.shape(), &[1, 6]); // (3-1)*2 + 2
    }

    #[test]
    fn adjoint_identity_of_conv_and_transposed() {
        // <conv1d(x; W), y> == <x, conv1d_transposed(y; W)> on random data.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let (c_in, c_out, t, k) = (
                rng.random_range(1usize..4),
                rng.random_range(1usize..4),
                rng.random_range(4usize..16),
                rng.random_range(1usize..4),
            );
            let stride = rng.random_range(1usize..3);
            if t < k {
                continue;
            }
            let x = Tensor::constant(&[c_in, t], random_vec(&mut rng, c_in * t, -1.0, 1.0))
                .unwrap();
            let w = Tensor::constant(
                &[c_out, c_in, k],
                random_vec(&mut rng, c_out * c_in * k, -1.0, 1.0),
            )
            .unwrap();
            let cx = x.conv1d(&w, stride, 1, 0, 1).unwrap();
            let t_out = cx.shape()[1];
            let yv = random_vec(&mut rng, c_out * t_out, -1.0, 1.0);
            let y = Tensor::constant(&[c_out, t_out], yv.clone()).unwrap();

            let lhs: f64 = cx.values().iter().zip(&yv).map(|(a, b)| a * b).sum();
            let ty = y.conv1d_transposed(&w, stride).unwrap();
            // Transposed output is longer than t when strides overshoot;
            // the adjoint pairs it against x zero-extended.
            let rhs: f64 = ty
                .values()
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let (ci, j) = (i / ty.shape()[1], i % ty.shape()[1]);
                    if j < t {
                        v * x.values()[ci * t + j]
                    } else {
                        0.0
                    }
                })
                .sum();
            assert!((lhs - rhs).abs() < 1e-10, "adjoint broken: {lhs} vs {rhs}");
        }
    }
}

mod gradients {
    use super::*;

    #[test]
    fn add_sub_mul_div() {
        check_op(&[&[2, 3], &[2, 3]], 10, (-1.0, 1.0), |t| {
            t[0].add(&t[1])?.mul(&t[0])?.sum_all()
        });
        check_op(&[&[2, 3], &[2, 3]], 11, (0.5, 2.0), |t| {
            t[0].sub(&t[1])?.div(&t[1])?.sum_all()
        });
    }

    #[test]
    fn broadcast_row_and_scalar() {
        check_op(&[&[3, 4], &[3, 1]], 12, (0.5, 2.0), |t| {
            t[0].mul(&t[1])?.add(&t[1])?.sum_all()
        });
        check_op(&[&[3, 4], &[1]], 13, (0.5, 2.0), |t| {
            t[0].div(&t[1])?.sum_all()
        });
    }

    #[test]
    fn activations() {
        check_op(&[&[2, 5]], 14, (-2.0, 2.0), |t| {
            t[0].sigmoid()?.sum_all()
        });
        check_op(&[&[2, 5], &[1]], 15, (-2.0, 2.0), |t| {
            t[0].prelu(&t[1])?.mul(&t[0])?.sum_all()
        });
        // relu kink avoided by the input range
        check_op(&[&[2, 5]], 16, (0.1, 2.0), |t| t[0].relu()?.sum_all());
        check_op(&[&[2, 5]], 17, (0.5, 2.0), |t| t[0].sqrt()?.sum_all());
    }

    #[test]
    fn reductions_and_concat() {
        check_op(&[&[3, 4]], 18, (-1.0, 1.0), |t| {
            t[0].sum_rows()?.mul(&t[0].sum_rows()?)?.sum_all()
        });
        check_op(&[&[2, 4], &[3, 4]], 19, (-1.0, 1.0), |t| {
            t[0].concat_rows(&t[1])?.sigmoid()?.sum_all()
        });
        check_op(&[&[2, 3]], 20, (-1.0, 1.0), |t| t[0].mean_all());
    }

    #[test]
    fn losses() {
        check_op(&[&[2, 6], &[2, 6]], 21, (0.1, 0.9), |t| {
            t[0].mse_loss(&t[1])
        });
        check_op(&[&[2, 6]], 22, (-3.0, 3.0), |t| {
            let targets = Tensor::constant(&[2, 6], vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0].repeat(2))
                .unwrap();
            t[0].bce_with_logits(&targets)
        });
    }

    #[test]
    fn global_layer_norm_gradients() {
        check_op(&[&[3, 5], &[3, 1], &[3, 1]], 23, (0.2, 1.5), |t| {
            global_layer_norm(&t[0], &t[1], &t[2], 1e-8)?.sum_all()
        });
    }

    #[test]
    fn conv1d_gradients_all_configs() {
        for (seed, stride, dilation, padding, groups) in
            [(24, 1, 1, 0, 1), (25, 2, 1, 1, 1), (26, 1, 2, 2, 1), (27, 1, 1, 1, 2)]
        {
            let c_in = if groups == 2 { 4 } else { 3 };
            let c_out = if groups == 2 { 4 } else { 2 };
            let shapes: Vec<Vec<usize>> =
                vec![vec![c_in, 10], vec![c_out, c_in / groups, 3]];
            let shape_refs: Vec<&[usize]> = shapes.iter().map(Vec::as_slice).collect();
            check_op(&shape_refs, seed, (-1.0, 1.0), |t| {
                t[0].conv1d(&t[1], stride, dilation, padding, groups)?
                    .sigmoid()?
                    .sum_all()
            });
        }
    }

    #[test]
    fn conv1d_transposed_gradients() {
        for (seed, stride) in [(28, 1), (29, 2)] {
            check_op(&[&[2, 6], &[2, 3, 3]], seed, (-1.0, 1.0), |t| {
                t[0].conv1d_transposed(&t[1], stride)?.sigmoid()?.sum_all()
            });
        }
    }

    #[test]
    fn composed_graph_matches_finite_differences() {
        // A deliberately tangled graph touching most ops at once.
        check_op(&[&[2, 8], &[3, 2, 3], &[3, 1], &[3, 1], &[1]], 30, (0.2, 1.0), |t| {
            let conv = t[0].conv1d(&t[1], 1, 1, 1, 1)?;
            let normed = global_layer_norm(&conv, &t[2], &t[3], 1e-8)?;
            let act = normed.prelu(&t[4])?;
            let skip = act.mul(&conv)?;
            skip.sigmoid()?.mean_all()
        });
    }
}

mod optimizer {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut params = vec![vec![1.0, 2.0], vec![3.0]];
        let grads = vec![vec![0.0, 0.0], vec![0.0]];
        let mut state = AdamState::new(&[2, 1], 0.1);
        adam_step(&mut params, &grads, &mut state).unwrap();
        assert_eq!(params, vec![vec![1.0, 2.0], vec![3.0]]);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_about_lr() {
        // Bias-corrected unit moments: delta = lr * 1/(1 + eps) ~ lr.
        let mut params = vec![vec![0.0]];
        let grads = vec![vec![1.0]];
        let mut state = AdamState::new(&[1], 0.1);
        adam_step(&mut params, &grads, &mut state).unwrap();
        assert!((params[0][0] + 0.1).abs() < 1e-8, "got {}", params[0][0]);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let mut params = vec![random_vec(&mut rng, 8, -1.0, 1.0)];
            let mut state = AdamState::new(&[8], 1e-2);
            for _ in 0..50 {
                let grads = vec![params[0].iter().map(|p| 2.0 * p).collect()];
                adam_step(&mut params, &grads, &mut state).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let mut params = vec![vec![0.0; 3]];
        let grads = vec![vec![0.0; 2]];
        let mut state = AdamState::new(&[3], 0.1);
        assert!(adam_step(&mut params, &grads, &mut state).is_err());
    }

    #[test]
    fn descends_a_quadratic() {
        let mut params = vec![vec![5.0]];
        let mut state = AdamState::new(&[1], 0.3);
        for _ in 0..200 {
            let grads = vec![vec![2.0 * params[0][0]]];
            adam_step(&mut params, &grads, &mut state).unwrap();
        }
        assert!(params[0][0].abs() < 0.1, "got {}", params[0][0]);
    }
}

mod weight_files {
    use super::*;

    fn sample_records(seed: u64) -> Vec<WeightRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        vec![
            WeightRecord::new("left.encoder.weight", vec![4, 1, 8], random_vec(&mut rng, 32, -1.0, 1.0))
                .unwrap(),
            WeightRecord::new("left.encoder.bias", vec![4, 1], random_vec(&mut rng, 4, -1.0, 1.0))
                .unwrap(),
            WeightRecord::new("right.masker.weight", vec![2, 4, 1], random_vec(&mut rng, 8, -1.0, 1.0))
                .unwrap(),
        ]
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let records = sample_records(1);
        let mut bytes = Vec::new();
        write_dwt_to(&records, &mut bytes).unwrap();
        let back = read_dwt_from(bytes.as_slice()).unwrap();
        assert_eq!(records, back);
        // Byte-level idempotence too.
        let mut again = Vec::new();
        write_dwt_to(&back, &mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.dwt");
        let records = sample_records(2);
        write_dwt(&path, &records).unwrap();
        assert_eq!(read_dwt(&path).unwrap(), records);
    }

    #[test]
    fn rejects_bad_names_and_truncation() {
        assert!(WeightRecord::new("has space", vec![1], vec![0.0]).is_err());
        assert!(WeightRecord::new("", vec![1], vec![0.0]).is_err());
        let records = sample_records(3);
        let mut bytes = Vec::new();
        write_dwt_to(&records, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 4);
        assert!(read_dwt_from(bytes.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn any_small_record_set_round_trips(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1usize..5);
            let records: Vec<WeightRecord> = (0..n)
                .map(|i| {
                    let d0 = rng.random_range(1usize..4);
                    let d1 = rng.random_range(1usize..4);
                    WeightRecord::new(
                        format!("p{i}"),
                        vec![d0, d1],
                        random_vec(&mut rng, d0 * d1, -10.0, 10.0),
                    )
                    .unwrap()
                })
                .collect();
            let mut bytes = Vec::new();
            write_dwt_to(&records, &mut bytes).unwrap();
            prop_assert_eq!(read_dwt_from(bytes.as_slice()).unwrap(), records);
        }
    }
}
