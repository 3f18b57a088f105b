//! Goodness-of-fit helpers shared by the statistical tests.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square p-value of `counts` against equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let e = n as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    ChiSquared::new((counts.len() - 1) as f64).unwrap().sf(stat)
}

/// One-sample Kolmogorov-Smirnov p-value against U(lo, hi), using the
/// asymptotic distribution with the usual small-sample correction.
pub fn ks_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut x: Vec<f64> = samples.iter().map(|v| (v - lo) / (hi - lo)).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).max((i + 1) as f64 / n - v))
        .fold(0.0, f64::max);
    let sq = n.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    kolmogorov_sf(lambda)
}

fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Two-sided normal-approximation p-value for `k` successes in `n` trials at `p`.
pub fn binomial_p(k: u64, n: u64, p: f64) -> f64 {
    use statrs::distribution::Normal;
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    let z = ((k as f64 - mean) / sd).abs();
    2.0 * Normal::new(0.0, 1.0).unwrap().sf(z)
}
