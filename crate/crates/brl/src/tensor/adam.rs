use super::ParamVector;
use crate::error::{Error, Result};

/// Adam with bias correction. Gradients are read, never modified; the
/// caller zeroes them (the tape does this on register).
#[derive(Debug, Clone)]
pub struct AdamState {
    step_count: u64,
    m: Vec<f64>,
    v: Vec<f64>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            step_count: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One update. Errors if any gradient is non-finite or if a parameter
    /// would become non-finite.
    pub fn apply(&mut self, params: &mut ParamVector) -> Result<()> {
        assert_eq!(params.len(), self.m.len(), "adam: parameter count mismatch");
        if !params.grads_finite() {
            return Err(Error::Divergence {
                step: self.step_count,
                what: "non-finite gradient".to_string(),
            });
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let (values, grads) = params.split_mut();
        for (i, p) in values.iter_mut().enumerate() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        if !params.all_finite() {
            return Err(Error::Divergence {
                step: self.step_count,
                what: "non-finite parameter after update".to_string(),
            });
        }
        Ok(())
    }
}
