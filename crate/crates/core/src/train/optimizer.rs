//! Adam with decoupled weight decay and global-norm gradient clipping.

use crate::model::ParamStore;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamW {
    cfg: AdamWConfig,
    first: ParamStore,
    second: ParamStore,
    /// Tensors exempt from weight decay (biases).
    no_decay: Vec<bool>,
    steps: u64,
}

/// Scale `grads` so their global L2 norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_grad_norm(grads: &mut ParamStore, max_norm: f64) -> f64 {
    let norm = grads.l2_norm();
    let coef = max_norm / (norm + 1e-6);
    if coef < 1.0 {
        grads.scale(coef);
    }
    norm
}

impl AdamW {
    pub fn new(params: &ParamStore, cfg: AdamWConfig) -> Self {
        Self {
            cfg,
            first: params.zeros_like(),
            second: params.zeros_like(),
            no_decay: params.tensors.iter().map(|t| t.name.ends_with("bias")).collect(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One update; `lrs[i]` is the learning rate of tensor `i`.
    pub fn step(&mut self, params: &mut ParamStore, grads: &ParamStore, lrs: &[f64]) {
        self.steps += 1;
        let c = self.cfg;
        let t = self.steps as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for (i, tensor) in params.tensors.iter_mut().enumerate() {
            let lr = lrs[i];
            let decay = if self.no_decay[i] { 0.0 } else { c.weight_decay };
            let g = &grads.tensors[i].values;
            let m = &mut self.first.tensors[i].values;
            let v = &mut self.second.tensors[i].values;
            for j in 0..tensor.values.len() {
                m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
                v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
                let p = &mut tensor.values[j];
                *p -= lr * decay * *p;
                *p -= lr * (m[j] / bc1) / ((v[j] / bc2).sqrt() + c.eps);
            }
        }
    }
}
