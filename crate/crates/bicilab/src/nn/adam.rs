//! Adam optimizer state and update step.

use crate::{Error, Result};

/// First/second moment estimates plus the schedule-controlled learning
/// rate. One state drives one parameter list; element counts are fixed at
/// construction.
#[derive(Debug, Clone)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state (zero moments) for parameters of the given element
    /// counts, with beta1=0.9, beta2=0.999, eps=1e-8.
    pub fn new(param_sizes: &[usize], lr: f64) -> AdamState {
        AdamState {
            first_moment: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(
    params: &mut [Vec<f64>],
    grads: &[Vec<f64>],
    state: &mut AdamState,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::shape(
            "adam_step",
            format!(
                "{} params, {} grads, state for {}",
                params.len(),
                grads.len(),
                state.first_moment.len()
            ),
        ));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[i].len() {
            return Err(Error::shape(
                "adam_step",
                format!(
                    "parameter {i}: {} values, {} grads, {} moments",
                    p.len(),
                    g.len(),
                    state.first_moment[i].len()
                ),
            ));
        }
        let m = &mut state.first_moment[i];
        let v = &mut state.second_moment[i];
        for j in 0..p.len() {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p[j] -= state.lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}
