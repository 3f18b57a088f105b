use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Scatter eigenvalues below `RANK_TOL * lambda_max` count as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub dim: usize,
    pub mean: Vec<f64>,
    /// Principal axes, one orthonormal row of length `dim` each.
    pub axes: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    pub total_variance: f64,
    /// `n × axes.len()` coordinates of the input rows.
    pub projections: Vec<Vec<f64>>,
    /// Set when fewer than the requested number of axes carry variance.
    pub rank_deficient: bool,
}

impl PcaResult {
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| a.iter().zip(v).zip(&self.mean).map(|((a, x), m)| a * (x - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (a, &c) in self.axes.iter().zip(coords) {
            for (o, &ai) in out.iter_mut().zip(a) {
                *o += c * ai;
            }
        }
        out
    }

    pub fn cumulative_ratio(&self, k: usize) -> f64 {
        self.explained_ratio.iter().take(k).sum()
    }
}

/// Principal components of the `n × d` row-major `data`, via the symmetric
/// eigendecomposition of the scatter matrix of the centered data. Each axis
/// is signed so its largest-magnitude entry is positive.
///
/// The eigendecomposition is used instead of an SVD because the SVD
/// occasionally returned a right basis that did not span the data.
pub fn pca(data: &[f64], n: usize, d: usize, k: usize) -> Result<PcaResult, AnalysisError> {
    if d == 0 || data.len() != n * d {
        return Err(AnalysisError::ShapeMismatch { rows: n, dim: d, len: data.len() });
    }
    if n < 2 {
        return Err(AnalysisError::TooFewPoints(n));
    }
    if k == 0 || k > (n - 1).min(d) {
        return Err(AnalysisError::TooManyComponents { k, max: (n - 1).min(d) });
    }
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite { row: i / d });
    }

    let mut mean = vec![0.0; d];
    for row in data.chunks_exact(d) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, d, |i, j| data[i * d + j] - mean[j]);
    let total_ss: f64 = centered.iter().map(|v| v * v).sum();
    let denom = (n - 1) as f64;

    let eig = SymmetricEigen::new(centered.transpose() * &centered);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let l_max = order.first().map(|&i| eig.eigenvalues[i]).unwrap_or(0.0);

    let mut axes = Vec::with_capacity(k);
    let mut explained_variance = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let l = eig.eigenvalues[i];
        if l_max <= 0.0 || l <= RANK_TOL * l_max {
            break;
        }
        let mut axis: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let lead = axis
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (j, &v)| if v.abs() > best.1 { (j, v.abs()) } else { best });
        if axis[lead.0] < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        axes.push(axis);
        explained_variance.push(l / denom);
    }
    let total_variance = total_ss / denom;
    let explained_ratio = explained_variance
        .iter()
        .map(|v| if total_variance > 0.0 { v / total_variance } else { 0.0 })
        .collect();
    let projections = (0..n)
        .map(|i| {
            axes.iter()
                .map(|a| a.iter().enumerate().map(|(j, &aj)| aj * centered[(i, j)]).sum())
                .collect()
        })
        .collect();
    Ok(PcaResult {
        dim: d,
        mean,
        rank_deficient: axes.len() < k,
        axes,
        explained_variance,
        explained_ratio,
        total_variance,
        projections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn ellipse_in_fifty_dims_is_two_dimensional() {
        let mut rng = Rng::new(1);
        let d = 50;
        let u: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let mut data = Vec::new();
        for i in 0..200 {
            let t = i as f64 * 0.0314;
            for j in 0..d {
                data.push(3.0 * libm::cos(t) * u[j] + libm::sin(t) * w[j] + 1.0);
            }
        }
        let p = pca(&data, 200, d, 5).unwrap();
        assert!(p.cumulative_ratio(2) >= 0.999);
        assert!(p.rank_deficient);
        assert_eq!(p.axes.len(), 2);
    }

    #[test]
    fn mean_projects_to_origin() {
        let mut rng = Rng::new(2);
        let data: Vec<f64> = (0..40 * 6).map(|_| rng.normal()).collect();
        let p = pca(&data, 40, 6, 4).unwrap();
        for c in p.project(&p.mean) {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn sign_convention_and_ordering() {
        let mut rng = Rng::new(3);
        let data: Vec<f64> = (0..100 * 4).map(|i| rng.normal() * (1 + i % 4) as f64).collect();
        let p = pca(&data, 100, 4, 4).unwrap();
        for a in &p.axes {
            let m = a.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(m > 0.0);
        }
        for w in p.explained_ratio.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(p.explained_ratio.iter().sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn bad_requests() {
        assert!(matches!(pca(&[1.0, 2.0], 1, 2, 1), Err(AnalysisError::TooFewPoints(1))));
        assert!(matches!(pca(&[0.0; 6], 3, 2, 3), Err(AnalysisError::TooManyComponents { .. })));
        assert!(pca(&[0.0; 6], 3, 2, 1).unwrap().rank_deficient);
    }
}
