//! Synthetic embedding sets with known structure, for checking the probe
//! and the trajectory analysis end to end.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::embed::{EmbedError, EmbeddingSet, Pooling};
use crate::rng::Rng;

/// Balanced 0/1 labels in shuffled order.
pub fn balanced(n_pairs: usize, rng: &mut Rng) -> Vec<u8> {
    let mut y: Vec<u8> = (0..n_pairs).map(|i| u8::from(i < n_pairs / 2)).collect();
    rng.shuffle(&mut y);
    y
}

fn set(data: Vec<f32>, dim: usize, model: &str) -> Result<EmbeddingSet, EmbedError> {
    EmbeddingSet::new(model, 0, Pooling::MeanPatch, dim, data)
}

/// Same pairs repeat the first vector; different pairs draw a fresh
/// vector whose first coordinate is moved 1 to 3 units away. The label is
/// `|z1[0] - z2[0]| < 0.5`.
pub fn separable_pairs(n_pairs: usize, dim: usize, seed: u64) -> Result<(EmbeddingSet, Vec<u8>), EmbedError> {
    let mut rng = Rng::new(seed);
    let labels = balanced(n_pairs, &mut rng);
    let data = separable_data(&labels, dim, &mut rng);
    Ok((set(data, dim, "synthetic-separable")?, labels))
}

/// [`separable_pairs`] for given labels, e.g. those of a dataset manifest.
pub fn separable_for_labels(labels: &[u8], dim: usize, seed: u64) -> Result<EmbeddingSet, EmbedError> {
    let data = separable_data(labels, dim, &mut Rng::new(seed));
    set(data, dim, "synthetic-separable")
}

fn separable_data(labels: &[u8], dim: usize, rng: &mut Rng) -> Vec<f32> {
    let mut data = Vec::with_capacity(2 * labels.len() * dim);
    for &y in labels {
        let a: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let mut b = if y == 1 { a.clone() } else { (0..dim).map(|_| rng.normal()).collect() };
        if y == 0 {
            let gap = rng.uniform_range(1.0, 3.0);
            b[0] = if rng.coin() { a[0] + gap } else { a[0] - gap };
        }
        data.extend(a.iter().map(|&v| v as f32));
        data.extend(b.iter().map(|&v| v as f32));
    }
    data
}

/// Both views share every coordinate except the first, which is equal for
/// same pairs and 1 to 3 units apart otherwise.
pub fn single_coordinate_pairs(n_pairs: usize, dim: usize, seed: u64) -> Result<(EmbeddingSet, Vec<u8>), EmbedError> {
    let mut rng = Rng::new(seed);
    let labels = balanced(n_pairs, &mut rng);
    let mut data = Vec::with_capacity(2 * n_pairs * dim);
    for &y in &labels {
        let a: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
        let mut b = a.clone();
        if y == 0 {
            let gap = rng.uniform_range(1.0, 3.0);
            b[0] = if rng.coin() { a[0] + gap } else { a[0] - gap };
        }
        data.extend(a.iter().map(|&v| v as f32));
        data.extend(b.iter().map(|&v| v as f32));
    }
    Ok((set(data, dim, "synthetic-single-coordinate")?, labels))
}

/// One rotated, possibly mirrored view: `(cos α, sin α, c·s, noise…)`.
pub fn rotation_embedding(alpha: f64, chirality: f64, c: f64, noise: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(3 + noise.len());
    z.push(libm::cos(alpha));
    z.push(libm::sin(alpha));
    z.push(c * chirality);
    z.extend_from_slice(noise);
    z
}

/// Pairs of independently rotated views; same pairs share chirality,
/// different pairs have opposite chirality.
pub fn rotation_pairs(
    n_pairs: usize,
    noise_dims: usize,
    c: f64,
    noise_scale: f64,
    seed: u64,
) -> Result<(EmbeddingSet, Vec<u8>), EmbedError> {
    let mut rng = Rng::new(seed);
    let labels = balanced(n_pairs, &mut rng);
    let dim = 3 + noise_dims;
    let mut data = Vec::with_capacity(2 * n_pairs * dim);
    let mut noise = alloc::vec![0.0; noise_dims];
    for &y in &labels {
        let s1 = if rng.coin() { 1.0 } else { -1.0 };
        let s2 = if y == 1 { s1 } else { -s1 };
        for s in [s1, s2] {
            let alpha = rng.uniform() * TAU;
            for v in noise.iter_mut() {
                *v = noise_scale * rng.normal();
            }
            data.extend(rotation_embedding(alpha, s, c, &noise).iter().map(|&v| v as f32));
        }
    }
    Ok((set(data, dim, "synthetic-rotation")?, labels))
}

/// Noise-free embeddings of a full azimuth sweep in `step_deg` increments,
/// with the azimuths in degrees.
pub fn rotation_sweep(step_deg: f64, chirality: f64, c: f64, noise_dims: usize) -> (Vec<f64>, Vec<f64>) {
    let n = libm::round(360.0 / step_deg) as usize;
    let zeros = alloc::vec![0.0; noise_dims];
    let mut data = Vec::with_capacity(n * (3 + noise_dims));
    let mut az = Vec::with_capacity(n);
    for i in 0..n {
        let a = i as f64 * step_deg;
        az.push(a);
        data.extend(rotation_embedding(a.to_radians(), chirality, c, &zeros));
    }
    (data, az)
}

/// A copy of `labels` in random order, keeping the class counts.
pub fn shuffled(labels: &[u8], seed: u64) -> Vec<u8> {
    let mut y = labels.to_vec();
    Rng::new(seed).shuffle(&mut y);
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_labels_follow_first_coordinate() {
        let (set, y) = separable_pairs(400, 8, 1).unwrap();
        assert_eq!(y.iter().filter(|&&v| v == 1).count(), 200);
        for (p, &label) in y.iter().enumerate() {
            let (a, b) = set.pair(p);
            assert_eq!(u8::from((a[0] - b[0]).abs() < 0.5), label);
        }
    }

    #[test]
    fn single_coordinate_pairs_differ_only_in_first() {
        let (set, _) = single_coordinate_pairs(50, 6, 2).unwrap();
        for p in 0..50 {
            let (a, b) = set.pair(p);
            assert_eq!(a[1..], b[1..]);
        }
    }

    #[test]
    fn rotation_pairs_encode_chirality() {
        let (set, y) = rotation_pairs(100, 2, 0.5, 0.1, 3).unwrap();
        for (p, &label) in y.iter().enumerate() {
            let (a, b) = set.pair(p);
            assert_eq!(u8::from(a[2] == b[2]), label);
        }
    }

    #[test]
    fn sweep_covers_circle() {
        let (data, az) = rotation_sweep(1.0, 1.0, 0.5, 3);
        assert_eq!(az.len(), 360);
        assert_eq!(data.len(), 360 * 6);
        assert_eq!(az[359], 359.0);
    }
}
