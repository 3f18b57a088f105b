//! Per-layer embedding matrices and train-split standardization.
//!
//! Vector `2p` is the first view of pair `p` and `2p + 1` the second.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Mean over patch tokens, CLS excluded.
    MeanPatch,
    Cls,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("payload has {got} values, expected {count}×{dim}")]
    ShapeMismatch { count: usize, dim: usize, got: usize },
    #[error("non-finite value at vector {vector}, component {component}")]
    NonFinite { vector: usize, component: usize },
    #[error("vector count {0} is odd; embeddings come in pairs")]
    OddCount(usize),
    #[error("standardizer needs at least 2 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("dimension mismatch: standardizer has {expected}, input has {got}")]
    DimMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    pub model_id: String,
    pub layer: u32,
    pub pooling: Pooling,
    dim: usize,
    data: Vec<f32>,
}

impl EmbeddingSet {
    /// Validates shape, pairing and finiteness.
    pub fn new(model_id: impl Into<String>, layer: u32, pooling: Pooling, dim: usize, data: Vec<f32>) -> Result<Self, EmbedError> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(EmbedError::ShapeMismatch {
                count: if dim == 0 { 0 } else { data.len() / dim },
                dim,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite {
                vector: i / dim,
                component: i % dim,
            });
        }
        let count = data.len() / dim;
        if count % 2 == 1 {
            return Err(EmbedError::OddCount(count));
        }
        Ok(Self {
            model_id: model_id.into(),
            layer,
            pooling,
            dim,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn n_pairs(&self) -> usize {
        self.count() / 2
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn pair(&self, p: usize) -> (&[f32], &[f32]) {
        (self.row(2 * p), self.row(2 * p + 1))
    }
}

pub const STD_EPSILON: f64 = 1e-8;

/// Per-dimension affine standardization fitted on training pairs only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub epsilon: f64,
}

impl Standardizer {
    /// Mean and population standard deviation over both vectors of every
    /// listed pair, accumulated in f64; `std` is floored at `epsilon`.
    pub fn fit(set: &EmbeddingSet, pairs: &[usize]) -> Result<Self, EmbedError> {
        let rows = pairs.iter().flat_map(|&p| [2 * p, 2 * p + 1]);
        Self::fit_rows(set.dim(), rows.map(|i| set.row(i)))
    }

    pub fn fit_rows<'a>(dim: usize, rows: impl Iterator<Item = &'a [f32]> + Clone) -> Result<Self, EmbedError> {
        let mut mean = vec![0.0f64; dim];
        let mut n = 0usize;
        for r in rows.clone() {
            if r.len() != dim {
                return Err(EmbedError::DimMismatch { expected: dim, got: r.len() });
            }
            for (m, &v) in mean.iter_mut().zip(r) {
                *m += v as f64;
            }
            n += 1;
        }
        if n < 2 {
            return Err(EmbedError::TooFewVectors(n));
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut var = vec![0.0f64; dim];
        for r in rows {
            for ((s, &v), m) in var.iter_mut().zip(r).zip(&mean) {
                let d = v as f64 - m;
                *s += d * d;
            }
        }
        let std = var.iter().map(|s| (s / n as f64).sqrt().max(STD_EPSILON)).collect();
        Ok(Self {
            mean,
            std,
            epsilon: STD_EPSILON,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_into<T: Real>(&self, row: &[f32], out: &mut [T]) {
        debug_assert_eq!(row.len(), self.dim());
        for (((o, &v), m), s) in out.iter_mut().zip(row).zip(&self.mean).zip(&self.std) {
            *o = T::of((v as f64 - m) / s);
        }
    }

    pub fn apply<T: Real>(&self, row: &[f32]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.apply_into(row, &mut out);
        out
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.mean).zip(&self.std).map(|((z, m), s)| z * s + m).collect()
    }

    /// Standardized first and second views of `pairs`, each `len × dim`
    /// row-major.
    pub fn transform_pairs<T: Real>(&self, set: &EmbeddingSet, pairs: &[usize]) -> (Vec<T>, Vec<T>) {
        let d = self.dim();
        let mut z1 = vec![T::zero(); pairs.len() * d];
        let mut z2 = vec![T::zero(); pairs.len() * d];
        for (k, &p) in pairs.iter().enumerate() {
            let (a, b) = set.pair(p);
            self.apply_into(a, &mut z1[k * d..(k + 1) * d]);
            self.apply_into(b, &mut z2[k * d..(k + 1) * d]);
        }
        (z1, z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_set(pairs: usize, dim: usize, seed: u64, shift: f32) -> EmbeddingSet {
        let mut rng = Rng::new(seed);
        let data = (0..2 * pairs * dim).map(|_| rng.normal() as f32 * 3.0 + 1.5 + shift).collect();
        EmbeddingSet::new("m", 0, Pooling::MeanPatch, dim, data).unwrap()
    }

    #[test]
    fn constructor_validates() {
        assert!(matches!(
            EmbeddingSet::new("m", 0, Pooling::Cls, 3, vec![0.0; 7]),
            Err(EmbedError::ShapeMismatch { .. })
        ));
        assert_eq!(
            EmbeddingSet::new("m", 0, Pooling::Cls, 2, vec![0.0, 1.0, f32::NAN, 0.0]),
            Err(EmbedError::NonFinite { vector: 1, component: 0 })
        );
        assert_eq!(EmbeddingSet::new("m", 0, Pooling::Cls, 1, vec![0.0; 3]), Err(EmbedError::OddCount(3)));
    }

    #[test]
    fn standardized_training_data_is_unit_scaled() {
        let set = random_set(200, 8, 1, 0.0);
        let pairs: Vec<usize> = (0..150).collect();
        let st = Standardizer::fit(&set, &pairs).unwrap();
        let (z1, z2) = st.transform_pairs::<f64>(&set, &pairs);
        for j in 0..8 {
            let col: Vec<f64> = z1.chunks(8).chain(z2.chunks(8)).map(|r| r[j]).collect();
            let m = col.iter().sum::<f64>() / col.len() as f64;
            let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / col.len() as f64;
            assert!(m.abs() < 1e-5, "{m}");
            assert!((v.sqrt() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn constant_dimension_is_floored() {
        let data = vec![1.0, 5.0, 2.0, 5.0, 3.0, 5.0, 4.0, 5.0];
        let set = EmbeddingSet::new("m", 0, Pooling::Cls, 2, data).unwrap();
        let st = Standardizer::fit(&set, &[0, 1]).unwrap();
        assert_eq!(st.std[1], STD_EPSILON);
        assert_eq!(st.apply::<f64>(&[2.0, 5.0])[1], 0.0);
    }

    #[test]
    fn fitting_ignores_pairs_outside_the_split() {
        // Pairs 100.. are shifted; a leak would move the mean.
        let mut data = random_set(100, 4, 2, 0.0).data().to_vec();
        data.extend(random_set(50, 4, 3, 40.0).data());
        let set = EmbeddingSet::new("m", 0, Pooling::MeanPatch, 4, data).unwrap();
        let train: Vec<usize> = (0..100).collect();
        let all: Vec<usize> = (0..150).collect();
        let a = Standardizer::fit(&set, &train).unwrap();
        let b = Standardizer::fit(&set, &all).unwrap();
        assert!(a.mean.iter().all(|m| (m - 1.5).abs() < 1.0));
        assert!(a.mean.iter().zip(&b.mean).all(|(x, y)| (y - x) > 10.0));
    }

    #[test]
    fn too_few_vectors() {
        let set = random_set(2, 3, 0, 0.0);
        assert_eq!(Standardizer::fit(&set, &[]), Err(EmbedError::TooFewVectors(0)));
    }

    #[test]
    fn inverse_recovers_input() {
        let set = random_set(20, 5, 5, 0.0);
        let st = Standardizer::fit(&set, &(0..20).collect::<Vec<_>>()).unwrap();
        let z = st.apply::<f64>(set.row(3));
        let back = st.invert(&z);
        for (x, y) in back.iter().zip(set.row(3)) {
            assert!((x - *y as f64).abs() < 1e-5);
        }
    }
}
