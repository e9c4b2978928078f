//! Adam with bias correction, one state object per network.

use crate::mlp::{Gradients, Mlp};
use crate::NnError;

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Gradients,
    v: Gradients,
    step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(mlp: &Mlp, learning_rate: f64) -> Self {
        AdamState {
            m: Gradients::zeros_like(mlp),
            v: Gradients::zeros_like(mlp),
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One update in place. Rejects non-finite gradients so a diverged
    /// training run stops at the first bad batch instead of poisoning the
    /// parameters.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &Gradients) -> Result<(), NnError> {
        if !grads.is_finite() {
            return Err(NnError::NonFinite("gradient"));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let m_corr = 1.0 - self.beta1.powi(t);
        let v_corr = 1.0 - self.beta2.powi(t);

        let knobs = Knobs {
            lr: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            m_corr,
            v_corr,
        };
        let (weights, biases) = mlp.params_mut();
        let layers = weights.len();
        for l in 0..layers {
            update_slice(
                &mut weights[l],
                &grads.weights[l],
                &mut self.m.weights[l],
                &mut self.v.weights[l],
                knobs,
            );
            update_slice(
                &mut biases[l],
                &grads.biases[l],
                &mut self.m.biases[l],
                &mut self.v.biases[l],
                knobs,
            );
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
struct Knobs {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m_corr: f64,
    v_corr: f64,
}

fn update_slice(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], k: Knobs) {
    debug_assert_eq!(params.len(), grads.len());
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = k.beta1 * m[i] + (1.0 - k.beta1) * g;
        v[i] = k.beta2 * v[i] + (1.0 - k.beta2) * g * g;
        let m_hat = m[i] / k.m_corr;
        let v_hat = v[i] / k.v_corr;
        params[i] -= k.lr * m_hat / (v_hat.sqrt() + k.epsilon);
    }
}
