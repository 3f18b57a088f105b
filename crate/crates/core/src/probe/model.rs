//! The Siamese probe network with an exact backward pass.
//!
//! ```text
//! z -> affine(d, h) -> batch-norm(h) -> ReLU -> affine(h, p) -> u
//! z~ = u / max(|u|, eps)           (shared trunk for both views)
//! logit = w . |z~1 - z~2| + c,     p(same) = sigmoid(logit)
//! ```
//!
//! In training mode the batch-norm statistics are taken over all `2B` trunk
//! inputs of a batch (both views stacked), so one update of the running
//! statistics happens per step.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::ProbeError;
use crate::real::{gemm, Op, Real};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeShape {
    pub input: usize,
    pub hidden: usize,
    pub proj: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Offsets of the parameter blocks inside the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub w1: Range<usize>,
    pub b1: Range<usize>,
    pub gamma: Range<usize>,
    pub beta: Range<usize>,
    pub w2: Range<usize>,
    pub b2: Range<usize>,
    pub head_w: Range<usize>,
    pub head_b: Range<usize>,
}

impl Layout {
    pub fn new(s: ProbeShape) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let r = at..at + n;
            at += n;
            r
        };
        Self {
            w1: take(s.hidden * s.input),
            b1: take(s.hidden),
            gamma: take(s.hidden),
            beta: take(s.hidden),
            w2: take(s.proj * s.hidden),
            b2: take(s.proj),
            head_w: take(s.proj),
            head_b: take(1),
        }
    }

    pub fn len(&self) -> usize {
        self.head_b.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Blocks that receive decoupled weight decay (weights, not biases or
    /// batch-norm parameters).
    pub fn decayed(&self) -> [Range<usize>; 3] {
        [self.w1.clone(), self.w2.clone(), self.head_w.clone()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeModel<T: Real> {
    pub shape: ProbeShape,
    pub layout: Layout,
    pub params: Vec<T>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    pub bn_momentum: T,
    pub bn_eps: T,
    pub norm_eps: T,
}

/// Intermediate values of one forward pass, kept for the backward pass.
pub struct Forward<T: Real> {
    batch: usize,
    x: Vec<T>,
    xhat: Vec<T>,
    inv_std: Vec<T>,
    relu: Vec<T>,
    zt: Vec<T>,
    norms: Vec<T>,
    clamped: Vec<bool>,
    diff: Vec<T>,
    delta: Vec<T>,
    pub logits: Vec<T>,
    pub batch_mean: Vec<T>,
    pub batch_var: Vec<T>,
}

/// `n` copies of `row`, concatenated.
fn rows_of<T: Real>(row: &[T], n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n * row.len());
    for _ in 0..n {
        out.extend_from_slice(row);
    }
    out
}

#[inline]
pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Binary cross entropy of `sigmoid(logit)` against `label`, computed from
/// the logit so it never overflows.
#[inline]
pub fn bce_with_logit<T: Real>(logit: T, label: u8) -> T {
    let y = if label == 1 { T::one() } else { T::zero() };
    logit.max(T::zero()) - logit * y + (T::one() + (-logit.abs()).exp()).ln()
}

impl<T: Real> ProbeModel<T> {
    /// Fan-in scaled uniform initialization; batch-norm scale 1, shift 0.
    pub fn init(shape: ProbeShape, rng: &mut Rng) -> Self {
        let layout = Layout::new(shape);
        let mut params = vec![T::zero(); layout.len()];
        let mut fill = |r: Range<usize>, fan_in: usize, rng: &mut Rng| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut params[r] {
                *p = T::of(rng.uniform_range(-bound, bound));
            }
        };
        fill(layout.w1.clone(), shape.input, rng);
        fill(layout.b1.clone(), shape.input, rng);
        fill(layout.w2.clone(), shape.hidden, rng);
        fill(layout.b2.clone(), shape.hidden, rng);
        fill(layout.head_w.clone(), shape.proj, rng);
        fill(layout.head_b.clone(), shape.proj, rng);
        for g in &mut params[layout.gamma.clone()] {
            *g = T::one();
        }
        Self {
            shape,
            layout,
            params,
            running_mean: vec![T::zero(); shape.hidden],
            running_var: vec![T::one(); shape.hidden],
            bn_momentum: T::of(0.1),
            bn_eps: T::of(1e-5),
            norm_eps: T::of(1e-12),
        }
    }

    #[inline]
    pub fn block(&self, r: &Range<usize>) -> &[T] {
        &self.params[r.clone()]
    }

    pub fn head_bias(&self) -> T {
        self.params[self.layout.head_b.start]
    }

    /// Trunk + head forward pass over `z1`, `z2` (`B × d` each).
    pub fn forward_cached(&self, z1: &[T], z2: &[T], mode: Mode) -> Result<Forward<T>, ProbeError> {
        let ProbeShape { input: d, hidden: h, proj: p } = self.shape;
        if z1.len() != z2.len() || z1.len() % d != 0 {
            return Err(ProbeError::DimMismatch {
                expected: d,
                got: if z1.len() % d == 0 { z2.len() } else { z1.len() },
            });
        }
        let b = z1.len() / d;
        if mode == Mode::Train && b < 2 {
            return Err(ProbeError::BatchTooSmall(b));
        }
        let m = 2 * b;
        let mut x = Vec::with_capacity(m * d);
        x.extend_from_slice(z1);
        x.extend_from_slice(z2);

        let l = &self.layout;
        let mut a = rows_of(self.block(&l.b1), m);
        gemm(m, d, h, T::one(), &x, Op::N, self.block(&l.w1), Op::T, T::one(), &mut a);

        let (batch_mean, batch_var) = match mode {
            Mode::Train => {
                let mut mean = vec![T::zero(); h];
                for row in a.chunks_exact(h) {
                    for (mu, &v) in mean.iter_mut().zip(row) {
                        *mu += v;
                    }
                }
                let inv_m = T::one() / T::of(m as f64);
                for mu in &mut mean {
                    *mu *= inv_m;
                }
                let mut var = vec![T::zero(); h];
                for row in a.chunks_exact(h) {
                    for ((s, &v), &mu) in var.iter_mut().zip(row).zip(&mean) {
                        let dv = v - mu;
                        *s += dv * dv;
                    }
                }
                for s in &mut var {
                    *s *= inv_m;
                }
                (mean, var)
            }
            Mode::Eval => (self.running_mean.clone(), self.running_var.clone()),
        };
        let inv_std: Vec<T> = batch_var.iter().map(|&v| T::one() / (v + self.bn_eps).sqrt()).collect();
        let gamma = self.block(&l.gamma);
        let beta = self.block(&l.beta);
        let mut xhat = a;
        let mut relu = vec![T::zero(); m * h];
        for (xr, rr) in xhat.chunks_exact_mut(h).zip(relu.chunks_exact_mut(h)) {
            for (((((x, r), &mu), &is), &g), &bt) in
                xr.iter_mut().zip(rr).zip(&batch_mean).zip(&inv_std).zip(gamma).zip(beta)
            {
                let xh = (*x - mu) * is;
                *x = xh;
                let y = g * xh + bt;
                *r = if y > T::zero() { y } else { T::zero() };
            }
        }

        let mut u = rows_of(self.block(&l.b2), m);
        gemm(m, h, p, T::one(), &relu, Op::N, self.block(&l.w2), Op::T, T::one(), &mut u);

        let mut norms = Vec::with_capacity(m);
        let mut clamped = Vec::with_capacity(m);
        for row in u.chunks_exact_mut(p) {
            let n = row.iter().map(|&v| v * v).sum::<T>().sqrt();
            let (n, c) = if n > self.norm_eps { (n, false) } else { (self.norm_eps, true) };
            let inv = T::one() / n;
            for v in row.iter_mut() {
                *v *= inv;
            }
            norms.push(n);
            clamped.push(c);
        }
        let zt = u;

        let hw = self.block(&l.head_w);
        let hb = self.head_bias();
        let mut diff = vec![T::zero(); b * p];
        let mut delta = vec![T::zero(); b * p];
        let mut logits = Vec::with_capacity(b);
        let (zt1, zt2) = zt.split_at(b * p);
        for (((r1, r2), dr), lr) in zt1
            .chunks_exact(p)
            .zip(zt2.chunks_exact(p))
            .zip(diff.chunks_exact_mut(p))
            .zip(delta.chunks_exact_mut(p))
        {
            let mut acc = hb;
            for ((((&a1, &a2), t), dl), &w) in r1.iter().zip(r2).zip(dr).zip(lr).zip(hw) {
                *t = a1 - a2;
                *dl = t.abs();
                acc += w * *dl;
            }
            logits.push(acc);
        }
        Ok(Forward {
            batch: b,
            x,
            xhat,
            inv_std,
            relu,
            zt,
            norms,
            clamped,
            diff,
            delta,
            logits,
            batch_mean,
            batch_var,
        })
    }

    /// Probabilities `p(same | z1, z2)`. Training mode uses batch statistics
    /// and updates the running statistics.
    pub fn forward(&mut self, z1: &[T], z2: &[T], mode: Mode) -> Result<Vec<T>, ProbeError> {
        let f = self.forward_cached(z1, z2, mode)?;
        if mode == Mode::Train {
            self.update_running_stats(&f);
        }
        Ok(f.logits.iter().map(|&l| sigmoid(l)).collect())
    }

    pub fn update_running_stats(&mut self, f: &Forward<T>) {
        let m = 2 * f.batch;
        let mom = self.bn_momentum;
        let unbias = if m > 1 { T::of(m as f64 / (m as f64 - 1.0)) } else { T::one() };
        for j in 0..self.shape.hidden {
            self.running_mean[j] = (T::one() - mom) * self.running_mean[j] + mom * f.batch_mean[j];
            self.running_var[j] = (T::one() - mom) * self.running_var[j] + mom * f.batch_var[j] * unbias;
        }
    }

    /// Mean BCE of a forward pass.
    pub fn loss(f: &Forward<T>, labels: &[u8]) -> T {
        let total: T = f.logits.iter().zip(labels).map(|(&l, &y)| bce_with_logit(l, y)).sum();
        total / T::of(f.batch as f64)
    }

    /// Gradient of the mean BCE with respect to every parameter, through
    /// batch statistics when the pass ran in training mode.
    pub fn backward(&self, f: &Forward<T>, labels: &[u8], mode: Mode) -> Vec<T> {
        let ProbeShape { input: d, hidden: h, proj: p } = self.shape;
        let l = &self.layout;
        let b = f.batch;
        let m = 2 * b;
        let mut g = vec![T::zero(); l.len()];

        let inv_b = T::one() / T::of(b as f64);
        let dlogit: Vec<T> = f
            .logits
            .iter()
            .zip(labels)
            .map(|(&z, &y)| (sigmoid(z) - if y == 1 { T::one() } else { T::zero() }) * inv_b)
            .collect();

        let hw = self.block(&l.head_w);
        let mut dzt = vec![T::zero(); m * p];
        {
            let (gw, rest) = g[l.head_w.start..].split_at_mut(p);
            for k in 0..b {
                let dk = dlogit[k];
                rest[0] += dk;
                for j in 0..p {
                    gw[j] += dk * f.delta[k * p + j];
                    let t = f.diff[k * p + j];
                    // Subgradient of |t| is 0 at t = 0.
                    let s = if t > T::zero() {
                        T::one()
                    } else if t < T::zero() {
                        -T::one()
                    } else {
                        T::zero()
                    };
                    let dt = dk * hw[j] * s;
                    dzt[k * p + j] = dt;
                    dzt[(b + k) * p + j] = -dt;
                }
            }
        }

        // Through z~ = u / |u|.
        let mut du = dzt;
        for i in 0..m {
            let row = &mut du[i * p..(i + 1) * p];
            let inv = T::one() / f.norms[i];
            if f.clamped[i] {
                for v in row.iter_mut() {
                    *v *= inv;
                }
            } else {
                let z = &f.zt[i * p..(i + 1) * p];
                let proj = z.iter().zip(row.iter()).map(|(&a, &b)| a * b).sum::<T>();
                for (v, &zj) in row.iter_mut().zip(z) {
                    *v = (*v - zj * proj) * inv;
                }
            }
        }

        gemm(p, m, h, T::one(), &du, Op::T, &f.relu, Op::N, T::zero(), &mut g[l.w2.clone()]);
        {
            let gb2 = &mut g[l.b2.clone()];
            for row in du.chunks_exact(p) {
                for (a, &v) in gb2.iter_mut().zip(row) {
                    *a += v;
                }
            }
        }
        let mut dy = vec![T::zero(); m * h];
        gemm(m, p, h, T::one(), &du, Op::N, self.block(&l.w2), Op::N, T::zero(), &mut dy);
        // relu is zero exactly where the pre-activation is not positive.
        // Written as a select so it vectorizes instead of branching.
        for (v, &r) in dy.iter_mut().zip(&f.relu) {
            *v = if r > T::zero() { *v } else { T::zero() };
        }

        let gamma = self.block(&l.gamma);
        let mut sum_dy = vec![T::zero(); h];
        let mut sum_dy_xhat = vec![T::zero(); h];
        for (row, xr) in dy.chunks_exact(h).zip(f.xhat.chunks_exact(h)) {
            for (((s, sx), &v), &xh) in sum_dy.iter_mut().zip(sum_dy_xhat.iter_mut()).zip(row).zip(xr) {
                *s += v;
                *sx += v * xh;
            }
        }
        g[l.gamma.clone()].copy_from_slice(&sum_dy_xhat);
        g[l.beta.clone()].copy_from_slice(&sum_dy);

        // dA from dXhat = dY * gamma.
        let mut da = dy;
        match mode {
            Mode::Train => {
                let inv_m = T::one() / T::of(m as f64);
                for (row, xr) in da.chunks_exact_mut(h).zip(f.xhat.chunks_exact(h)) {
                    for (((((v, &xh), &gj), &is), &s), &sx) in
                        row.iter_mut().zip(xr).zip(gamma).zip(&f.inv_std).zip(&sum_dy).zip(&sum_dy_xhat)
                    {
                        *v = gj * is * (*v - inv_m * s - xh * inv_m * sx);
                    }
                }
            }
            Mode::Eval => {
                for row in da.chunks_exact_mut(h) {
                    for ((v, &gj), &is) in row.iter_mut().zip(gamma).zip(&f.inv_std) {
                        *v *= gj * is;
                    }
                }
            }
        }
        gemm(h, m, d, T::one(), &da, Op::T, &f.x, Op::N, T::zero(), &mut g[l.w1.clone()]);
        {
            let gb1 = &mut g[l.b1.clone()];
            for row in da.chunks_exact(h) {
                for (a, &v) in gb1.iter_mut().zip(row) {
                    *a += v;
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape() -> ProbeShape {
        ProbeShape { input: 6, hidden: 5, proj: 4 }
    }

    fn batch(rng: &mut Rng, b: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
        ((0..b * d).map(|_| rng.normal()).collect(), (0..b * d).map(|_| rng.normal()).collect())
    }

    #[test]
    fn identical_inputs_give_the_head_bias() {
        let mut rng = Rng::new(1);
        let mut m = ProbeModel::<f64>::init(shape(), &mut rng);
        let (z, _) = batch(&mut rng, 4, 6);
        let want = sigmoid(m.head_bias());
        for mode in [Mode::Train, Mode::Eval] {
            for p in m.forward(&z, &z, mode).unwrap() {
                assert!((p - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn swapping_views_keeps_predictions() {
        let mut rng = Rng::new(2);
        let m = ProbeModel::<f64>::init(shape(), &mut rng);
        let (a, b) = batch(&mut rng, 7, 6);
        for mode in [Mode::Train, Mode::Eval] {
            let p1 = m.forward_cached(&a, &b, mode).unwrap().logits;
            let p2 = m.forward_cached(&b, &a, mode).unwrap().logits;
            for (x, y) in p1.iter().zip(&p2) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trunk_outputs_are_unit_norm() {
        let mut rng = Rng::new(3);
        let m = ProbeModel::<f64>::init(shape(), &mut rng);
        let (a, b) = batch(&mut rng, 5, 6);
        let f = m.forward_cached(&a, &b, Mode::Train).unwrap();
        for row in f.zt.chunks(4) {
            let n: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn train_mode_needs_two_pairs() {
        let mut rng = Rng::new(4);
        let mut m = ProbeModel::<f64>::init(shape(), &mut rng);
        let (a, b) = batch(&mut rng, 1, 6);
        assert_eq!(m.forward(&a, &b, Mode::Train), Err(ProbeError::BatchTooSmall(1)));
        assert_eq!(m.forward(&a, &b, Mode::Eval).unwrap().len(), 1);
    }

    #[test]
    fn eval_predictions_do_not_depend_on_batch_composition() {
        let mut rng = Rng::new(5);
        let m = ProbeModel::<f64>::init(shape(), &mut rng);
        let (a, b) = batch(&mut rng, 6, 6);
        let all = m.forward_cached(&a, &b, Mode::Eval).unwrap().logits;
        let first = m.forward_cached(&a[..12], &b[..12], Mode::Eval).unwrap().logits;
        assert_eq!(&all[..2], &first[..]);
    }

    #[test]
    fn loss_is_stable_for_extreme_logits() {
        assert!(bce_with_logit(800.0f64, 1) < 1e-300);
        assert!((bce_with_logit(-800.0f64, 1) - 800.0).abs() < 1e-9);
        assert!((bce_with_logit(0.0f64, 0) - core::f64::consts::LN_2).abs() < 1e-15);
    }
}
