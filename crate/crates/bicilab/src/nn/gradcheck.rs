//! Central finite-difference verification of analytic gradients.

use crate::Result;

/// Default perturbation for double-precision checks.
pub const DEFAULT_H: f64 = 1e-5;

/// Maximum relative error between analytic gradients and central finite
/// differences of `f` at `point`.
///
/// `f` maps the flat parameter vectors to a scalar. When
/// `coords_per_tensor` is set, only that many evenly spaced coordinates of
/// each tensor are probed (deterministic); otherwise every coordinate is.
/// The error is `|a - fd| / max(|a|, |fd|, 1e-6)`.
pub fn max_relative_error(
    f: &mut dyn FnMut(&[Vec<f64>]) -> Result<f64>,
    point: &[Vec<f64>],
    analytic: &[Vec<f64>],
    h: f64,
    coords_per_tensor: Option<usize>,
) -> Result<f64> {
    assert_eq!(point.len(), analytic.len(), "gradient list length mismatch");
    let mut work: Vec<Vec<f64>> = point.to_vec();
    let mut worst = 0.0f64;
    for ti in 0..point.len() {
        let n = point[ti].len();
        assert_eq!(analytic[ti].len(), n, "gradient {ti} shape mismatch");
        let coords: Vec<usize> = match coords_per_tensor {
            Some(k) if k < n => (0..k).map(|i| i * n / k).collect(),
            _ => (0..n).collect(),
        };
        for j in coords {
            let orig = work[ti][j];
            work[ti][j] = orig + h;
            let plus = f(&work)?;
            work[ti][j] = orig - h;
            let minus = f(&work)?;
            work[ti][j] = orig;
            let fd = (plus - minus) / (2.0 * h);
            let a = analytic[ti][j];
            let err = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
            if err > worst {
                worst = err;
            }
        }
    }
    Ok(worst)
}
