//! AdamW with decoupled weight decay and the warmup + cosine schedule.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct AdamW<T: Real> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub step: u64,
    m: Vec<T>,
    v: Vec<T>,
}

impl<T: Real> AdamW<T> {
    pub fn new(n_params: usize, beta1: f64, beta2: f64, eps: f64, weight_decay: f64) -> Self {
        Self { beta1, beta2, eps, weight_decay, step: 0, m: vec![T::zero(); n_params], v: vec![T::zero(); n_params] }
    }

    /// One update at learning rate `lr`. Only indices inside `decayed` are
    /// shrunk by `lr * weight_decay`.
    pub fn update(&mut self, params: &mut [T], grads: &[T], lr: f64, decayed: &[Range<usize>]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - libm::pow(self.beta1, t);
        let bc2 = 1.0 - libm::pow(self.beta2, t);
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let (one_b1, one_b2) = (T::of(1.0 - self.beta1), T::of(1.0 - self.beta2));
        let step_size = T::of(lr / bc1);
        let inv_bc2 = T::of(1.0 / bc2);
        let eps = T::of(self.eps);

        if self.weight_decay != 0.0 {
            let shrink = T::of(1.0 - lr * self.weight_decay);
            for r in decayed {
                for p in &mut params[r.clone()] {
                    *p *= shrink;
                }
            }
        }
        for i in 0..params.len() {
            let g = grads[i];
            let m = b1 * self.m[i] + one_b1 * g;
            let v = b2 * self.v[i] + one_b2 * g * g;
            self.m[i] = m;
            self.v[i] = v;
            params[i] -= step_size * m / ((v * inv_bc2).sqrt() + eps);
        }
    }
}

/// Linear warmup over `warmup` epochs, then half-cosine annealing to zero at
/// `max_epochs`.
pub fn lr_at(epoch: usize, base_lr: f64, warmup: usize, max_epochs: usize) -> f64 {
    if epoch < warmup {
        return base_lr * (epoch + 1) as f64 / warmup as f64;
    }
    let span = max_epochs.saturating_sub(warmup).max(1) as f64;
    let progress = ((epoch - warmup) as f64 / span).min(1.0);
    (base_lr * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * progress))).max(0.0)
}
