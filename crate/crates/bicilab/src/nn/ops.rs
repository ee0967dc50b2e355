//! Operator set: elementwise arithmetic with trailing-dimension broadcast,
//! activations, reductions, 1-D convolutions, and loss primitives.

use super::tensor::Tensor;
use crate::{Error, Result};

/// How the right-hand operand maps onto the left-hand shape.
///
/// Only the rhs broadcasts: right-aligned, every rhs dimension must equal
/// the lhs dimension or be 1 (missing leading dimensions count as 1).
enum Broadcast {
    Same,
    Scalar,
    /// rhs is `[C, 1]` against lhs `[C, T]`.
    Row { t: usize },
    General {
        lhs_dims: Vec<usize>,
        lhs_strides: Vec<usize>,
        rhs_strides: Vec<usize>,
    },
}

impl Broadcast {
    fn plan(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Result<Broadcast> {
        if lhs == rhs {
            return Ok(Broadcast::Same);
        }
        let rhs_numel: usize = rhs.iter().product();
        if rhs_numel == 1 {
            return Ok(Broadcast::Scalar);
        }
        if rhs.len() > lhs.len() {
            return Err(Error::shape(
                op,
                format!("rhs rank {} exceeds lhs rank {} ({lhs:?} vs {rhs:?})", rhs.len(), lhs.len()),
            ));
        }
        // Right-align and validate.
        let offset = lhs.len() - rhs.len();
        for (d, &rd) in rhs.iter().enumerate() {
            let ld = lhs[offset + d];
            if rd != ld && rd != 1 {
                return Err(Error::shape(
                    op,
                    format!("dimension {}: lhs {ld} vs rhs {rd} ({lhs:?} vs {rhs:?})", offset + d),
                ));
            }
        }
        if lhs.len() == 2 && rhs.len() == 2 && rhs[0] == lhs[0] && rhs[1] == 1 {
            return Ok(Broadcast::Row { t: lhs[1] });
        }
        // General strided mapping.
        let mut lhs_strides = vec![1usize; lhs.len()];
        for d in (0..lhs.len() - 1).rev() {
            lhs_strides[d] = lhs_strides[d + 1] * lhs[d + 1];
        }
        let mut rhs_full = vec![1usize; lhs.len()];
        rhs_full[offset..].copy_from_slice(rhs);
        let mut rhs_strides_raw = vec![1usize; lhs.len()];
        for d in (0..lhs.len() - 1).rev() {
            rhs_strides_raw[d] = rhs_strides_raw[d + 1] * rhs_full[d + 1];
        }
        let rhs_strides = (0..lhs.len())
            .map(|d| if rhs_full[d] == 1 { 0 } else { rhs_strides_raw[d] })
            .collect();
        Ok(Broadcast::General {
            lhs_dims: lhs.to_vec(),
            lhs_strides,
            rhs_strides,
        })
    }

    #[inline]
    fn rhs_index(&self, lhs_flat: usize) -> usize {
        match self {
            Broadcast::Same => lhs_flat,
            Broadcast::Scalar => 0,
            Broadcast::Row { t } => lhs_flat / t,
            Broadcast::General {
                lhs_dims,
                lhs_strides,
                rhs_strides,
            } => {
                let mut j = 0;
                for d in 0..lhs_dims.len() {
                    j += (lhs_flat / lhs_strides[d]) % lhs_dims[d] * rhs_strides[d];
                }
                j
            }
        }
    }
}

/// Elementwise binary op with rhs broadcast; `f` computes the value,
/// `dl`/`dr` the partials with respect to lhs and rhs at given operands.
fn binary(
    op: &'static str,
    lhs: &Tensor,
    rhs: &Tensor,
    f: fn(f64, f64) -> f64,
    dl: fn(f64, f64) -> f64,
    dr: fn(f64, f64) -> f64,
) -> Result<Tensor> {
    let plan = Broadcast::plan(op, lhs.shape(), rhs.shape())?;
    let a = lhs.values();
    let b = rhs.values();
    let out: Vec<f64> = match &plan {
        Broadcast::Same => a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect(),
        _ => (0..a.len()).map(|i| f(a[i], b[plan.rhs_index(i)])).collect(),
    };
    let shape = lhs.shape().to_vec();
    let (la, lb) = (lhs.clone(), rhs.clone());
    Tensor::from_op(
        shape,
        out,
        vec![lhs.clone(), rhs.clone()],
        Box::new(move |idx, gout, acc| {
            let a = la.values();
            let b = lb.values();
            let plan = Broadcast::plan("backward", la.shape(), lb.shape())
                .expect("validated in forward");
            match idx {
                0 => {
                    for i in 0..a.len() {
                        acc[i] += gout[i] * dl(a[i], b[plan.rhs_index(i)]);
                    }
                }
                _ => {
                    for i in 0..a.len() {
                        let j = plan.rhs_index(i);
                        acc[j] += gout[i] * dr(a[i], b[j]);
                    }
                }
            }
        }),
    )
}

/// Elementwise unary op; `df` is the local derivative given (input, output).
fn unary(
    lhs: &Tensor,
    f: impl Fn(f64) -> f64,
    df: fn(f64, f64) -> f64,
) -> Result<Tensor> {
    let out: Vec<f64> = lhs.values().iter().map(|&x| f(x)).collect();
    let shape = lhs.shape().to_vec();
    let la = lhs.clone();
    let saved = out.clone();
    Tensor::from_op(
        shape,
        out,
        vec![lhs.clone()],
        Box::new(move |_, gout, acc| {
            let a = la.values();
            for i in 0..a.len() {
                acc[i] += gout[i] * df(a[i], saved[i]);
            }
        }),
    )
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Tensor {
    pub fn add(&self, rhs: &Tensor) -> Result<Tensor> {
        binary("add", self, rhs, |a, b| a + b, |_, _| 1.0, |_, _| 1.0)
    }

    pub fn sub(&self, rhs: &Tensor) -> Result<Tensor> {
        binary("sub", self, rhs, |a, b| a - b, |_, _| 1.0, |_, _| -1.0)
    }

    /// Hadamard (elementwise) product.
    pub fn mul(&self, rhs: &Tensor) -> Result<Tensor> {
        binary("mul", self, rhs, |a, b| a * b, |_, b| b, |a, _| a)
    }

    pub fn div(&self, rhs: &Tensor) -> Result<Tensor> {
        binary(
            "div",
            self,
            rhs,
            |a, b| a / b,
            |_, b| 1.0 / b,
            |a, b| -a / (b * b),
        )
    }

    pub fn neg(&self) -> Result<Tensor> {
        self.scale(-1.0)
    }

    /// Multiplication by a constant.
    pub fn scale(&self, c: f64) -> Result<Tensor> {
        let out: Vec<f64> = self.values().iter().map(|&x| c * x).collect();
        Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone()],
            Box::new(move |_, gout, acc| {
                for i in 0..acc.len() {
                    acc[i] += c * gout[i];
                }
            }),
        )
    }

    pub fn relu(&self) -> Result<Tensor> {
        unary(self, |x| x.max(0.0), |x, _| if x > 0.0 { 1.0 } else { 0.0 })
    }

    /// PReLU with a scalar learned slope: `x` for `x > 0`, `alpha * x`
    /// otherwise.
    pub fn prelu(&self, alpha: &Tensor) -> Result<Tensor> {
        if alpha.numel() != 1 {
            return Err(Error::shape(
                "prelu",
                format!("alpha must be scalar, got {:?}", alpha.shape()),
            ));
        }
        let a = alpha.values()[0];
        let out: Vec<f64> = self
            .values()
            .iter()
            .map(|&x| if x > 0.0 { x } else { a * x })
            .collect();
        let lx = self.clone();
        Tensor::from_op(
            self.shape().to_vec(),
            out,
            vec![self.clone(), alpha.clone()],
            Box::new(move |idx, gout, acc| {
                let x = lx.values();
                match idx {
                    0 => {
                        for i in 0..x.len() {
                            acc[i] += gout[i] * if x[i] > 0.0 { 1.0 } else { a };
                        }
                    }
                    _ => {
                        let mut s = 0.0;
                        for i in 0..x.len() {
                            if x[i] <= 0.0 {
                                s += gout[i] * x[i];
                            }
                        }
                        acc[0] += s;
                    }
                }
            }),
        )
    }

    pub fn sigmoid(&self) -> Result<Tensor> {
        unary(self, stable_sigmoid, |_, y| y * (1.0 - y))
    }

    /// Elementwise square root; inputs must be non-negative.
    pub fn sqrt(&self) -> Result<Tensor> {
        if let Some(i) = self.values().iter().position(|&v| v < 0.0) {
            return Err(Error::Numerical(format!(
                "sqrt of negative value {} at index {i}",
                self.values()[i]
            )));
        }
        unary(self, f64::sqrt, |_, y| 0.5 / y.max(1e-300))
    }

    /// Sum of all elements, as a `[1]` tensor.
    pub fn sum_all(&self) -> Result<Tensor> {
        let s = self.values().iter().sum();
        Tensor::from_op(
            vec![1],
            vec![s],
            vec![self.clone()],
            Box::new(move |_, gout, acc| {
                for v in acc.iter_mut() {
                    *v += gout[0];
                }
            }),
        )
    }

    /// Mean of all elements, as a `[1]` tensor.
    pub fn mean_all(&self) -> Result<Tensor> {
        let n = self.numel() as f64;
        self.sum_all()?.scale(1.0 / n)
    }

    /// Per-row sum over the trailing axis: `[C, T] -> [C, 1]`.
    pub fn sum_rows(&self) -> Result<Tensor> {
        let &[c, t] = self.shape() else {
            return Err(Error::shape(
                "sum_rows",
                format!("expected rank 2, got {:?}", self.shape()),
            ));
        };
        let v = self.values();
        let out: Vec<f64> = (0..c).map(|i| v[i * t..(i + 1) * t].iter().sum()).collect();
        Tensor::from_op(
            vec![c, 1],
            out,
            vec![self.clone()],
            Box::new(move |_, gout, acc| {
                for i in 0..c {
                    for j in 0..t {
                        acc[i * t + j] += gout[i];
                    }
                }
            }),
        )
    }

    /// Stacks two `[C, T]` tensors along the channel axis.
    pub fn concat_rows(&self, rhs: &Tensor) -> Result<Tensor> {
        let (&[c1, t1], &[c2, t2]) = (self.shape(), rhs.shape()) else {
            return Err(Error::shape(
                "concat_rows",
                format!("expected rank 2, got {:?} and {:?}", self.shape(), rhs.shape()),
            ));
        };
        if t1 != t2 {
            return Err(Error::shape(
                "concat_rows",
                format!("time lengths differ: {t1} vs {t2}"),
            ));
        }
        let mut out = Vec::with_capacity((c1 + c2) * t1);
        out.extend_from_slice(self.values());
        out.extend_from_slice(rhs.values());
        let split = c1 * t1;
        Tensor::from_op(
            vec![c1 + c2, t1],
            out,
            vec![self.clone(), rhs.clone()],
            Box::new(move |idx, gout, acc| match idx {
                0 => {
                    for i in 0..split {
                        acc[i] += gout[i];
                    }
                }
                _ => {
                    for i in 0..acc.len() {
                        acc[i] += gout[split + i];
                    }
                }
            }),
        )
    }

    /// Mean squared error against a target of identical shape, as `[1]`.
    pub fn mse_loss(&self, target: &Tensor) -> Result<Tensor> {
        if self.shape() != target.shape() {
            return Err(Error::shape(
                "mse_loss",
                format!("{:?} vs {:?}", self.shape(), target.shape()),
            ));
        }
        let n = self.numel() as f64;
        let p = self.values();
        let t = target.values();
        let loss = p
            .iter()
            .zip(t)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<f64>()
            / n;
        let (lp, lt) = (self.clone(), target.clone());
        Tensor::from_op(
            vec![1],
            vec![loss],
            vec![self.clone(), target.clone()],
            Box::new(move |idx, gout, acc| {
                let p = lp.values();
                let t = lt.values();
                let sign = if idx == 0 { 1.0 } else { -1.0 };
                for i in 0..p.len() {
                    acc[i] += gout[0] * sign * 2.0 * (p[i] - t[i]) / n;
                }
            }),
        )
    }

    /// Mean binary cross entropy of logits against `[0, 1]` targets, as
    /// `[1]`. Computed in the numerically stable softplus form.
    pub fn bce_with_logits(&self, targets: &Tensor) -> Result<Tensor> {
        if self.shape() != targets.shape() {
            return Err(Error::shape(
                "bce_with_logits",
                format!("{:?} vs {:?}", self.shape(), targets.shape()),
            ));
        }
        let n = self.numel() as f64;
        let z = self.values();
        let y = targets.values();
        let loss = z
            .iter()
            .zip(y)
            .map(|(&z, &y)| softplus(z) - z * y)
            .sum::<f64>()
            / n;
        let (lz, ly) = (self.clone(), targets.clone());
        Tensor::from_op(
            vec![1],
            vec![loss],
            vec![self.clone(), targets.clone()],
            Box::new(move |idx, gout, acc| {
                let z = lz.values();
                let y = ly.values();
                match idx {
                    0 => {
                        for i in 0..z.len() {
                            acc[i] += gout[0] * (stable_sigmoid(z[i]) - y[i]) / n;
                        }
                    }
                    _ => {
                        for i in 0..z.len() {
                            acc[i] += gout[0] * (-z[i]) / n;
                        }
                    }
                }
            }),
        )
    }

    /// 1-D convolution (cross-correlation semantics) of `[C_in, T]` with
    /// kernels `[C_out, C_in/groups, K]`, producing `[C_out, T']` where
    /// `T' = floor((T + 2 padding - dilation (K-1) - 1)/stride) + 1`.
    pub fn conv1d(
        &self,
        weight: &Tensor,
        stride: usize,
        dilation: usize,
        padding: usize,
        groups: usize,
    ) -> Result<Tensor> {
        let &[c_in, t_in] = self.shape() else {
            return Err(Error::shape(
                "conv1d",
                format!("input must be [C_in, T], got {:?}", self.shape()),
            ));
        };
        let &[c_out, cpg, k] = weight.shape() else {
            return Err(Error::shape(
                "conv1d",
                format!("weight must be [C_out, C_in/groups, K], got {:?}", weight.shape()),
            ));
        };
        if stride == 0 || dilation == 0 || groups == 0 {
            return Err(Error::param(
                "conv1d stride, dilation, and groups must be positive".to_string(),
            ));
        }
        if c_in % groups != 0 || c_out % groups != 0 || cpg != c_in / groups {
            return Err(Error::shape(
                "conv1d",
                format!(
                    "groups {groups} incompatible with C_in {c_in}, C_out {c_out}, \
                     weight C_in/groups {cpg}"
                ),
            ));
        }
        let span = dilation * (k - 1) + 1;
        if t_in + 2 * padding < span {
            return Err(Error::shape(
                "conv1d",
                format!("input length {t_in} too short for kernel span {span} (padding {padding})"),
            ));
        }
        let t_out = (t_in + 2 * padding - span) / stride + 1;

        let x = self.values();
        let w = weight.values();
        let ci_per_g = c_in / groups;
        let co_per_g = c_out / groups;
        let mut out = vec![0.0; c_out * t_out];
        for co in 0..c_out {
            let g = co / co_per_g;
            for cig in 0..ci_per_g {
                let ci = g * ci_per_g + cig;
                let x_row = &x[ci * t_in..(ci + 1) * t_in];
                for kk in 0..k {
                    let wv = w[(co * ci_per_g + cig) * k + kk];
                    let off = (kk * dilation) as isize - padding as isize;
                    let (t_lo, t_hi) = valid_range(off, stride, t_in, t_out);
                    let row = &mut out[co * t_out..(co + 1) * t_out];
                    for t in t_lo..t_hi {
                        row[t] += wv * x_row[((t * stride) as isize + off) as usize];
                    }
                }
            }
        }

        let (lx, lw) = (self.clone(), weight.clone());
        Tensor::from_op(
            vec![c_out, t_out],
            out,
            vec![self.clone(), weight.clone()],
            Box::new(move |idx, gout, acc| {
                let x = lx.values();
                let w = lw.values();
                match idx {
                    0 => {
                        for co in 0..c_out {
                            let g = co / co_per_g;
                            let g_row = &gout[co * t_out..(co + 1) * t_out];
                            for cig in 0..ci_per_g {
                                let ci = g * ci_per_g + cig;
                                for kk in 0..k {
                                    let wv = w[(co * ci_per_g + cig) * k + kk];
                                    let off = (kk * dilation) as isize - padding as isize;
                                    let (t_lo, t_hi) = valid_range(off, stride, t_in, t_out);
                                    let row = &mut acc[ci * t_in..(ci + 1) * t_in];
                                    for t in t_lo..t_hi {
                                        row[((t * stride) as isize + off) as usize] += wv * g_row[t];
                                    }
                                }
                            }
                        }
                    }
                    _ => {
                        for co in 0..c_out {
                            let g = co / co_per_g;
                            let g_row = &gout[co * t_out..(co + 1) * t_out];
                            for cig in 0..ci_per_g {
                                let ci = g * ci_per_g + cig;
                                let x_row = &x[ci * t_in..(ci + 1) * t_in];
                                for kk in 0..k {
                                    let off = (kk * dilation) as isize - padding as isize;
                                    let (t_lo, t_hi) = valid_range(off, stride, t_in, t_out);
                                    let mut s = 0.0;
                                    for t in t_lo..t_hi {
                                        s += g_row[t] * x_row[((t * stride) as isize + off) as usize];
                                    }
                                    acc[(co * ci_per_g + cig) * k + kk] += s;
                                }
                            }
                        }
                    }
                }
            }),
        )
    }

    /// Transposed 1-D convolution: `[C_in, T]` with kernels
    /// `[C_in, C_out, K]` gives `[C_out, (T-1) stride + K]`. With the same
    /// kernel tensor, this is the exact adjoint of [`Tensor::conv1d`]
    /// (stride equal, no padding or dilation).
    pub fn conv1d_transposed(&self, weight: &Tensor, stride: usize) -> Result<Tensor> {
        let &[c_in, t_in] = self.shape() else {
            return Err(Error::shape(
                "conv1d_transposed",
                format!("input must be [C_in, T], got {:?}", self.shape()),
            ));
        };
        let &[wc_in, c_out, k] = weight.shape() else {
            return Err(Error::shape(
                "conv1d_transposed",
                format!("weight must be [C_in, C_out, K], got {:?}", weight.shape()),
            ));
        };
        if stride == 0 {
            return Err(Error::param("conv1d_transposed stride must be positive".to_string()));
        }
        if wc_in != c_in {
            return Err(Error::shape(
                "conv1d_transposed",
                format!("input channels {c_in} != weight C_in {wc_in}"),
            ));
        }
        let t_out = (t_in - 1) * stride + k;

        let x = self.values();
        let w = weight.values();
        let mut out = vec![0.0; c_out * t_out];
        for ci in 0..c_in {
            let x_row = &x[ci * t_in..(ci + 1) * t_in];
            for co in 0..c_out {
                let row = &mut out[co * t_out..(co + 1) * t_out];
                for kk in 0..k {
                    let wv = w[(ci * c_out + co) * k + kk];
                    for t in 0..t_in {
                        row[t * stride + kk] += wv * x_row[t];
                    }
                }
            }
        }

        let (lx, lw) = (self.clone(), weight.clone());
        Tensor::from_op(
            vec![c_out, t_out],
            out,
            vec![self.clone(), weight.clone()],
            Box::new(move |idx, gout, acc| {
                let x = lx.values();
                let w = lw.values();
                match idx {
                    0 => {
                        for ci in 0..c_in {
                            let row = &mut acc[ci * t_in..(ci + 1) * t_in];
                            for co in 0..c_out {
                                let g_row = &gout[co * t_out..(co + 1) * t_out];
                                for kk in 0..k {
                                    let wv = w[(ci * c_out + co) * k + kk];
                                    for t in 0..t_in {
                                        row[t] += wv * g_row[t * stride + kk];
                                    }
                                }
                            }
                        }
                    }
                    _ => {
                        for ci in 0..c_in {
                            let x_row = &x[ci * t_in..(ci + 1) * t_in];
                            for co in 0..c_out {
                                let g_row = &gout[co * t_out..(co + 1) * t_out];
                                for kk in 0..k {
                                    let mut s = 0.0;
                                    for t in 0..t_in {
                                        s += x_row[t] * g_row[t * stride + kk];
                                    }
                                    acc[(ci * c_out + co) * k + kk] += s;
                                }
                            }
                        }
                    }
                }
            }),
        )
    }
}

/// Global layer normalization over all non-batch dimensions with learned
/// per-channel scale and shift (`gamma`, `beta` shaped `[C, 1]`).
///
/// Zero variance is guarded by `eps`; a constant input therefore maps to
/// `beta` exactly.
pub fn global_layer_norm(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    eps: f64,
) -> Result<Tensor> {
    let n = x.numel() as f64;
    let mean = x.sum_all()?.scale(1.0 / n)?;
    let centered = x.sub(&mean)?;
    let var = centered.mul(&centered)?.sum_all()?.scale(1.0 / n)?;
    let denom = var.add(&Tensor::scalar(eps))?.sqrt()?;
    centered.div(&denom)?.mul(gamma)?.add(beta)
}

/// Valid output range `[t_lo, t_hi)` such that `t*stride + off` stays
/// inside `[0, t_in)`.
#[inline]
fn valid_range(off: isize, stride: usize, t_in: usize, t_out: usize) -> (usize, usize) {
    let t_lo = if off >= 0 {
        0
    } else {
        ((-off) as usize).div_ceil(stride)
    };
    let max_j = t_in as isize - 1 - off;
    if max_j < 0 {
        return (0, 0);
    }
    let t_hi = (max_j as usize / stride + 1).min(t_out);
    (t_lo.min(t_hi), t_hi)
}
