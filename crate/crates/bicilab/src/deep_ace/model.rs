//! Forward passes for the three model wirings.

use super::{ModelConfig, ModelParams, Variant};
use crate::nn::{global_layer_norm, Tensor};
use crate::{Error, Result};

const NORM_EPS: f64 = 1e-8;
const L2_EPS: f64 = 1e-8;

/// Hadamard fusion of two latent representations of identical shape.
pub fn fuse(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::shape(
            "fuse",
            format!("{:?} vs {:?}", a.shape(), b.shape()),
        ));
    }
    a.mul(b)
}

/// Parameters materialized as graph tensors for one forward/backward
/// cycle. Bind trainable for training, constant for inference.
pub struct BoundModel<'a> {
    pub params: &'a ModelParams,
    tensors: Vec<Tensor>,
}

impl<'a> BoundModel<'a> {
    pub fn bind(params: &'a ModelParams, trainable: bool) -> Result<BoundModel<'a>> {
        let tensors = params
            .entries
            .iter()
            .map(|e| {
                if trainable {
                    Tensor::parameter(&e.shape, e.values.clone())
                } else {
                    Tensor::constant(&e.shape, e.values.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundModel { params, tensors })
    }

    /// Leaf tensors in parameter order (for gradient readout).
    pub fn leaves(&self) -> &[Tensor] {
        &self.tensors
    }

    fn t(&self, name: &str) -> &Tensor {
        let idx = self.params.index[name];
        &self.tensors[idx]
    }

    fn config(&self) -> &ModelConfig {
        &self.params.config
    }
}

/// One side's outputs: denoised amplitudes and the masker logits the
/// selection loss trains against.
#[derive(Clone)]
pub struct SideOutput {
    /// `[M, T_lat]`, strictly inside (0, 1) thanks to the output sigmoid.
    pub p: Tensor,
    /// Pre-sigmoid masker activations, `[M, T_lat]`.
    pub mask_logits: Tensor,
}

/// Learned filterbank + antirectifier: mean-subtract per channel,
/// L2-normalize per channel, concatenate positive and negative lobes, and
/// project back to F channels.
fn encode(bm: &BoundModel, side: &str, x: &Tensor) -> Result<Tensor> {
    let c = bm.config();
    if x.shape()[1] < c.filter_len {
        return Err(Error::shape(
            "encode",
            format!(
                "input of {} samples shorter than one {}-sample filter",
                x.shape()[1],
                c.filter_len
            ),
        ));
    }
    let enc = x.conv1d(bm.t(&format!("{side}.encoder.weight")), c.stride, 1, 0, 1)?;

    let t_lat = enc.shape()[1] as f64;
    let mean = enc.sum_rows()?.scale(1.0 / t_lat)?;
    let centered = enc.sub(&mean)?;
    let norms = centered
        .mul(&centered)?
        .sum_rows()?
        .add(&Tensor::scalar(L2_EPS))?
        .sqrt()?;
    let normalized = centered.div(&norms)?;
    let both_lobes = normalized.relu()?.concat_rows(&normalized.neg()?.relu()?)?;
    both_lobes
        .conv1d(bm.t(&format!("{side}.antirect.proj.weight")), 1, 1, 0, 1)?
        .add(bm.t(&format!("{side}.antirect.proj.bias")))
}

/// Deep envelope detector: the F -> M dimensionality reduction.
fn ded(bm: &BoundModel, side: &str, x: &Tensor) -> Result<Tensor> {
    let c = bm.config();
    let pad = (c.kernel - 1) / 2;
    let mut y = x.clone();
    for i in 0..c.ded_channels.len() {
        y = y
            .conv1d(bm.t(&format!("{side}.ded.conv{i}.weight")), 1, 1, pad, 1)?
            .add(bm.t(&format!("{side}.ded.conv{i}.bias")))?;
        if i + 1 < c.ded_channels.len() {
            y = y.prelu(bm.t(&format!("{side}.ded.prelu{i}.alpha")))?;
        }
    }
    Ok(y)
}

/// Bottleneck projection into the separator width.
fn bottleneck(bm: &BoundModel, side: &str, x: &Tensor) -> Result<Tensor> {
    x.conv1d(bm.t(&format!("{side}.bottleneck.weight")), 1, 1, 0, 1)?
        .add(bm.t(&format!("{side}.bottleneck.bias")))
}

/// Temporal convolutional separator: R repeats of X dilated blocks; the
/// output is the sum of the skip branches.
fn separate(bm: &BoundModel, side: &str, x: &Tensor) -> Result<Tensor> {
    let c = bm.config();
    let mut residual = x.clone();
    let mut skip_sum: Option<Tensor> = None;
    for r in 0..c.repeats {
        for b in 0..c.blocks_per_repeat {
            let pre = format!("{side}.tcn.r{r}.b{b}");
            let dilation = 1usize << b;
            let pad = dilation * (c.kernel - 1) / 2;

            let hid = residual
                .conv1d(bm.t(&format!("{pre}.conv_in.weight")), 1, 1, 0, 1)?
                .add(bm.t(&format!("{pre}.conv_in.bias")))?
                .prelu(bm.t(&format!("{pre}.prelu1.alpha")))?;
            let hid = global_layer_norm(
                &hid,
                bm.t(&format!("{pre}.norm1.gamma")),
                bm.t(&format!("{pre}.norm1.beta")),
                NORM_EPS,
            )?;
            let deep = hid
                .conv1d(
                    bm.t(&format!("{pre}.depthwise.weight")),
                    1,
                    dilation,
                    pad,
                    c.hidden,
                )?
                .add(bm.t(&format!("{pre}.depthwise.bias")))?
                .prelu(bm.t(&format!("{pre}.prelu2.alpha")))?;
            let deep = global_layer_norm(
                &deep,
                bm.t(&format!("{pre}.norm2.gamma")),
                bm.t(&format!("{pre}.norm2.beta")),
                NORM_EPS,
            )?;

            let res = deep
                .conv1d(bm.t(&format!("{pre}.res.weight")), 1, 1, 0, 1)?
                .add(bm.t(&format!("{pre}.res.bias")))?;
            residual = residual.add(&res)?;

            let skip = deep
                .conv1d(bm.t(&format!("{pre}.skip.weight")), 1, 1, 0, 1)?
                .add(bm.t(&format!("{pre}.skip.bias")))?;
            skip_sum = Some(match skip_sum {
                Some(acc) => acc.add(&skip)?,
                None => skip,
            });
        }
    }
    Ok(skip_sum.expect("at least one block"))
}

/// Masker + decoder: gate the envelope-detector output by the learned
/// mask, decode at the latent rate, and squash into (0, 1).
fn mask_and_decode(
    bm: &BoundModel,
    side: &str,
    separator_out: &Tensor,
    ded_out: &Tensor,
) -> Result<SideOutput> {
    if separator_out.shape()[1] != ded_out.shape()[1] {
        return Err(Error::shape(
            "mask_and_decode",
            format!(
                "separator frames {} != envelope frames {}",
                separator_out.shape()[1],
                ded_out.shape()[1]
            ),
        ));
    }
    let logits = separator_out
        .conv1d(bm.t(&format!("{side}.masker.weight")), 1, 1, 0, 1)?
        .add(bm.t(&format!("{side}.masker.bias")))?;
    let masked = logits.sigmoid()?.mul(ded_out)?;
    let p = masked
        .conv1d_transposed(bm.t(&format!("{side}.decoder.weight")), 1)?
        .add(bm.t(&format!("{side}.decoder.bias")))?
        .sigmoid()?;
    Ok(SideOutput {
        p,
        mask_logits: logits,
    })
}

fn as_input(x: &[f64]) -> Result<Tensor> {
    Tensor::constant(&[1, x.len()], x.to_vec())
}

/// One independent stack over a mono signal.
pub fn forward_monaural(bm: &BoundModel, x: &[f64]) -> Result<SideOutput> {
    if bm.params.variant != Variant::Monaural {
        return Err(Error::param(format!(
            "forward_monaural on a {} model",
            bm.params.variant.name()
        )));
    }
    let input = as_input(x)?;
    let latent = encode(bm, "mono", &input)?;
    let envelopes = ded(bm, "mono", &latent)?;
    let separated = separate(bm, "mono", &bottleneck(bm, "mono", &latent)?)?;
    mask_and_decode(bm, "mono", &separated, &envelopes)
}

/// Two-sided forward pass.
///
/// Bilateral: the sides never exchange information. Fused: the encoder
/// outputs are fused (Hadamard) and drive both separators, and the
/// separator outputs are fused and drive both maskers; only the envelope
/// detectors stay side-private, which keeps the two outputs distinct.
pub fn forward_bilateral(
    bm: &BoundModel,
    x_left: &[f64],
    x_right: &[f64],
) -> Result<(SideOutput, SideOutput)> {
    if bm.params.variant == Variant::Monaural {
        return Err(Error::param(
            "forward_bilateral on a monaural model".to_string(),
        ));
    }
    if x_left.len() != x_right.len() {
        return Err(Error::shape(
            "forward",
            format!("left {} samples, right {}", x_left.len(), x_right.len()),
        ));
    }
    let (input_l, input_r) = (as_input(x_left)?, as_input(x_right)?);
    let latent_l = encode(bm, "left", &input_l)?;
    let latent_r = encode(bm, "right", &input_r)?;
    let env_l = ded(bm, "left", &latent_l)?;
    let env_r = ded(bm, "right", &latent_r)?;

    match bm.params.variant {
        Variant::Bilateral => {
            let sep_l = separate(bm, "left", &bottleneck(bm, "left", &latent_l)?)?;
            let sep_r = separate(bm, "right", &bottleneck(bm, "right", &latent_r)?)?;
            Ok((
                mask_and_decode(bm, "left", &sep_l, &env_l)?,
                mask_and_decode(bm, "right", &sep_r, &env_r)?,
            ))
        }
        Variant::Fused => {
            let fused_latent = fuse(&latent_l, &latent_r)?;
            let sep_l = separate(bm, "left", &bottleneck(bm, "left", &fused_latent)?)?;
            let sep_r = separate(bm, "right", &bottleneck(bm, "right", &fused_latent)?)?;
            let fused_sep = fuse(&sep_l, &sep_r)?;
            Ok((
                mask_and_decode(bm, "left", &fused_sep, &env_l)?,
                mask_and_decode(bm, "right", &fused_sep, &env_r)?,
            ))
        }
        Variant::Monaural => unreachable!("rejected above"),
    }
}
