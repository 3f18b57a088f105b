//! Mini-batch training with early stopping on validation loss.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::model::{bce_with_logit, Mode, ProbeModel, ProbeShape};
use super::optim::{lr_at, AdamW};
use super::ProbeError;
use crate::real::Real;
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub warmup_epochs: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub hidden: usize,
    pub proj: usize,
    pub bn_momentum: f64,
    pub bn_eps: f64,
    pub norm_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            batch_size: 256,
            warmup_epochs: 15,
            max_epochs: 200,
            patience: 50,
            weight_decay: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            hidden: 256,
            proj: 128,
            bn_momentum: 0.1,
            bn_eps: 1e-5,
            norm_eps: 1e-12,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ProbeError> {
        let bad = |m| Err(ProbeError::InvalidConfig(m));
        if self.warmup_epochs >= self.max_epochs {
            return bad("warmup_epochs must be below max_epochs");
        }
        if self.batch_size < 2 {
            return bad("batch_size must be at least 2");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if self.hidden == 0 || self.proj == 0 {
            return bad("layer widths must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.bn_momentum) {
            return bad("bn_momentum must lie in [0, 1]");
        }
        if self.weight_decay < 0.0 || self.adam_eps <= 0.0 || self.bn_eps <= 0.0 || self.norm_eps <= 0.0 {
            return bad("weight_decay and epsilons must be non-negative");
        }
        Ok(())
    }

    /// Learning rate at `epoch` under warmup + cosine over the fixed horizon.
    pub fn lr_schedule(&self, epoch: usize) -> f64 {
        lr_at(epoch, self.lr, self.warmup_epochs, self.max_epochs)
    }

    pub fn shape(&self, input: usize) -> ProbeShape {
        ProbeShape { input, hidden: self.hidden, proj: self.proj }
    }

    pub fn init_model<T: Real>(&self, input: usize, rng: &mut Rng) -> ProbeModel<T> {
        let mut m = ProbeModel::init(self.shape(input), rng);
        m.bn_momentum = T::of(self.bn_momentum);
        m.bn_eps = T::of(self.bn_eps);
        m.norm_eps = T::of(self.norm_eps);
        m
    }
}

/// Pairs of (standardized) vectors with labels, row-major `n × dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairData<T> {
    pub dim: usize,
    pub z1: Vec<T>,
    pub z2: Vec<T>,
    pub labels: Vec<u8>,
}

impl<T: Real> PairData<T> {
    pub fn new(dim: usize, z1: Vec<T>, z2: Vec<T>, labels: Vec<u8>) -> Result<Self, ProbeError> {
        if dim == 0 || z1.len() != z2.len() || z1.len() != dim * labels.len() {
            return Err(ProbeError::DimMismatch { expected: dim * labels.len(), got: z1.len() });
        }
        Ok(Self { dim, z1, z2, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The subset at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let d = self.dim;
        let mut z1 = Vec::with_capacity(idx.len() * d);
        let mut z2 = Vec::with_capacity(idx.len() * d);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            z1.extend_from_slice(&self.z1[i * d..(i + 1) * d]);
            z2.extend_from_slice(&self.z2[i * d..(i + 1) * d]);
            labels.push(self.labels[i]);
        }
        Self { dim: d, z1, z2, labels }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub cross_entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T: Real> {
    /// Weights from the epoch with the lowest validation loss.
    pub model: ProbeModel<T>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub history: Vec<EpochRecord>,
}

const EVAL_CHUNK: usize = 1024;

/// Eval-mode accuracy and mean cross entropy; a pair is called "same" when
/// `p >= 0.5`.
pub fn evaluate<T: Real>(model: &ProbeModel<T>, data: &PairData<T>) -> Result<Metrics, ProbeError> {
    let d = data.dim;
    let n = data.len();
    if n == 0 {
        return Ok(Metrics { accuracy: f64::NAN, cross_entropy: f64::NAN });
    }
    let mut correct = 0usize;
    let mut ce = 0.0f64;
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let f = model.forward_cached(&data.z1[start * d..end * d], &data.z2[start * d..end * d], Mode::Eval)?;
        for (&l, &y) in f.logits.iter().zip(&data.labels[start..end]) {
            let pred = u8::from(l >= T::zero());
            correct += usize::from(pred == y);
            ce += bce_with_logit(l, y).to_f64();
        }
        start = end;
    }
    Ok(Metrics { accuracy: correct as f64 / n as f64, cross_entropy: ce / n as f64 })
}

/// Batch boundaries over `n` items; a trailing singleton joins the batch
/// before it.
pub fn batch_bounds(n: usize, batch_size: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut s = 0;
    while s < n {
        let e = (s + batch_size).min(n);
        out.push((s, e));
        s = e;
    }
    if out.len() > 1 && out.last().map(|&(s, e)| e - s) == Some(1) {
        let (_, e) = out.pop().unwrap();
        out.last_mut().unwrap().1 = e;
    }
    out
}

/// Train from a fresh initialization drawn with `init_seed`; batches are
/// reshuffled every epoch from `shuffle_seed`.
pub fn train_probe<T: Real>(
    train: &PairData<T>,
    val: &PairData<T>,
    cfg: &TrainConfig,
    init_seed: u64,
    shuffle_seed: u64,
) -> Result<TrainOutcome<T>, ProbeError> {
    cfg.validate()?;
    if train.len() < 2 {
        return Err(ProbeError::BatchTooSmall(train.len()));
    }
    if val.dim != train.dim {
        return Err(ProbeError::DimMismatch { expected: train.dim, got: val.dim });
    }
    let d = train.dim;
    let mut model: ProbeModel<T> = cfg.init_model(d, &mut Rng::new(init_seed));
    let decayed = model.layout.decayed();
    let mut opt = AdamW::<T>::new(model.layout.len(), cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);
    let mut shuffler = Rng::new(shuffle_seed);

    let n = train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let bounds = batch_bounds(n, cfg.batch_size);
    let mut bz1 = Vec::with_capacity(cfg.batch_size.min(n) * d * 2);
    let mut bz2 = Vec::with_capacity(cfg.batch_size.min(n) * d * 2);
    let mut by = Vec::with_capacity(cfg.batch_size.min(n) * 2);

    let mut best: Option<(usize, f64, ProbeModel<T>)> = None;
    let mut history = Vec::new();
    for epoch in 0..cfg.max_epochs {
        let lr = cfg.lr_schedule(epoch);
        shuffler.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for &(s, e) in &bounds {
            bz1.clear();
            bz2.clear();
            by.clear();
            for &i in &order[s..e] {
                bz1.extend_from_slice(&train.z1[i * d..(i + 1) * d]);
                bz2.extend_from_slice(&train.z2[i * d..(i + 1) * d]);
                by.push(train.labels[i]);
            }
            let f = model.forward_cached(&bz1, &bz2, Mode::Train)?;
            let loss = ProbeModel::loss(&f, &by).to_f64();
            if !loss.is_finite() {
                return Err(ProbeError::NonFiniteLoss { epoch, batch_start: s });
            }
            loss_sum += loss * (e - s) as f64;
            let grads = model.backward(&f, &by, Mode::Train);
            model.update_running_stats(&f);
            opt.update(&mut model.params, &grads, lr, &decayed);
        }
        let train_loss = loss_sum / n as f64;
        let val_loss = if val.is_empty() { train_loss } else { evaluate(&model, val)?.cross_entropy };
        if !val_loss.is_finite() {
            return Err(ProbeError::NonFiniteLoss { epoch, batch_start: n });
        }
        history.push(EpochRecord { epoch, lr, train_loss, val_loss });
        match &best {
            Some((_, b, _)) if val_loss >= *b => {}
            _ => best = Some((epoch, val_loss, model.clone())),
        }
        let best_epoch = best.as_ref().map(|b| b.0).unwrap_or(0);
        if epoch - best_epoch >= cfg.patience {
            break;
        }
    }
    let (best_epoch, best_val_loss, model) = best.expect("at least one epoch runs");
    Ok(TrainOutcome { model, best_epoch, best_val_loss, history })
}
