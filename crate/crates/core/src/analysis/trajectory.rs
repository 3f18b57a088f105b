use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::pca::{pca, PcaResult};
use super::AnalysisError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationTrajectory {
    pub pca: PcaResult,
    /// 2-D projections in input order.
    pub points: Vec<[f64; 2]>,
    pub azimuths: Vec<f64>,
    /// Distance from the first to the last point over the path length.
    pub closure: f64,
    /// Circular rank correlation between azimuth and projected angle.
    pub angular_correlation: f64,
}

/// PCA projection of an azimuth sweep (`n × d` rows, in sweep order) onto
/// its first two components.
pub fn rotation_trajectory(
    embeddings: &[f64],
    dim: usize,
    azimuths_deg: &[f64],
) -> Result<RotationTrajectory, AnalysisError> {
    let n = azimuths_deg.len();
    let p = pca(embeddings, n, dim, 2.min(dim).min(n.saturating_sub(1)).max(1))?;
    let points: Vec<[f64; 2]> = p
        .projections
        .iter()
        .map(|c| [c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0)])
        .collect();
    let length: f64 = points.windows(2).map(|w| dist(w[0], w[1])).sum();
    let closure = if length > 0.0 { dist(points[0], points[n - 1]) / length } else { f64::NAN };
    let projected: Vec<f64> = points.iter().map(|q| libm::atan2(q[1], q[0])).collect();
    let az: Vec<f64> = azimuths_deg.iter().map(|a| a.to_radians()).collect();
    Ok(RotationTrajectory {
        pca: p,
        points,
        azimuths: azimuths_deg.to_vec(),
        closure,
        angular_correlation: circular_rank_correlation(&az, &projected),
    })
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

/// Ranks of `angles` (radians) mapped to `2π·rank/n`; ties share the mean
/// rank.
fn uniform_scores(angles: &[f64]) -> Vec<f64> {
    let n = angles.len();
    let wrapped: Vec<f64> = angles.iter().map(|&a| libm::fmod(libm::fmod(a, TAU) + TAU, TAU)).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| wrapped[a].total_cmp(&wrapped[b]));
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && wrapped[idx[j + 1]] == wrapped[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks.iter().map(|r| TAU * r / n as f64).collect()
}

/// Circular-circular rank association in [0, 1]: the larger resultant
/// length of the rank-angle differences or sums, so both a rotated and a
/// reflected ordering score 1.
pub fn circular_rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return f64::NAN;
    }
    let (ua, ub) = (uniform_scores(a), uniform_scores(b));
    let resultant = |sign: f64| {
        let (mut c, mut s) = (0.0, 0.0);
        for (x, y) in ua.iter().zip(&ub) {
            c += libm::cos(x - sign * y);
            s += libm::sin(x - sign * y);
        }
        libm::hypot(c, s) / n as f64
    };
    resultant(1.0).max(resultant(-1.0))
}
