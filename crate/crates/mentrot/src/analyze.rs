//! File-level wrappers around layer curves, PCA plots and pooling comparisons.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mentrot_core::analysis::{
    compare_pooling, curve_csv, curve_svg, pca, rotation_trajectory, ChartOptions, LayerSweep, PoolingComparison,
};
use mentrot_core::embed::Pooling;
use serde::{Deserialize, Serialize};

use crate::error::{write_atomic, Error, Result};
use crate::mreb;
use crate::report::ProbeReport;

/// Probe reports (`*.json`) of a directory in file-name order.
pub fn load_reports(dir: &Path) -> Result<Vec<(PathBuf, ProbeReport)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(Error::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let reports = paths
        .into_iter()
        .map(|p| ProbeReport::load(&p).map(|r| (p, r)))
        .collect::<Result<Vec<_>>>()?;
    if reports.is_empty() {
        return Err(Error::Usage(format!("no report files in {}", dir.display())));
    }
    Ok(reports)
}

/// One sweep per report, named by model and disambiguated by variant
/// and pooling when needed.
pub fn sweeps(reports: &[(PathBuf, ProbeReport)]) -> Result<Vec<LayerSweep>> {
    let mut uses: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, r) in reports {
        *uses.entry(r.meta.model_id.as_str()).or_default() += 1;
    }
    reports
        .iter()
        .map(|(_, r)| {
            let mut s = r.sweep()?;
            if uses[r.meta.model_id.as_str()] > 1 {
                s.model_id = format!("{} {} {}", r.meta.model_id, r.meta.variant, pooling_name(r.meta.pooling));
            }
            Ok(s)
        })
        .collect()
}

fn pooling_name(p: Pooling) -> &'static str {
    match p {
        Pooling::MeanPatch => "mean_patch",
        Pooling::Cls => "cls",
    }
}

/// Writes the SVG chart and a CSV with the same stem; returns the CSV path.
pub fn write_curve(reports_dir: &Path, out_svg: &Path, opt: &ChartOptions) -> Result<PathBuf> {
    let reports = load_reports(reports_dir)?;
    let sweeps = sweeps(&reports)?;
    let svg = curve_svg(&sweeps, opt)?;
    let csv = out_svg.with_extension("csv");
    write_atomic(out_svg, svg.as_bytes())?;
    write_atomic(&csv, curve_csv(&sweeps).as_bytes())?;
    Ok(csv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaSummary {
    pub model_id: String,
    pub layer: u32,
    pub n: usize,
    pub dim: usize,
    pub explained_ratio: Vec<f64>,
    pub cumulative_2: f64,
    /// Present when rows are an azimuth sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angular_correlation: Option<f64>,
    pub points: Vec<[f64; 2]>,
}

/// PCA of every vector in an embedding file. With `sweep_step`, rows are
/// read as consecutive azimuths `0, step, 2·step, ...` and the trajectory
/// metrics are added.
pub fn pca_summary(file: &Path, sweep_step: Option<f64>) -> Result<PcaSummary> {
    let f = mreb::read(file)?;
    let (n, d) = (f.set.count(), f.set.dim());
    let data: Vec<f64> = f.set.data().iter().map(|&v| v as f64).collect();
    let k = 10.min(d).min(n.saturating_sub(1)).max(1);
    let full = pca(&data, n, d, k)?;
    let points = full
        .projections
        .iter()
        .map(|c| [c[0], c.get(1).copied().unwrap_or(0.0)])
        .collect();
    let (closure, angular_correlation) = match sweep_step {
        Some(step) => {
            let az: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
            let t = rotation_trajectory(&data, d, &az)?;
            (Some(t.closure), Some(t.angular_correlation))
        }
        None => (None, None),
    };
    Ok(PcaSummary {
        model_id: f.set.model_id.clone(),
        layer: f.set.layer,
        n,
        dim: d,
        cumulative_2: full.cumulative_ratio(2),
        explained_ratio: full.explained_ratio,
        closure,
        angular_correlation,
        points,
    })
}

/// Scatter of the first two components, colored by row order.
pub fn pca_svg(s: &PcaSummary) -> String {
    let (w, h, m) = (480.0, 480.0, 48.0);
    let ext = s
        .points
        .iter()
        .flat_map(|p| [p[0].abs(), p[1].abs()])
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.05;
    let sx = |x: f64| m + (x + ext) / (2.0 * ext) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y + ext) / (2.0 * ext) * (h - 2.0 * m);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle">{} layer {}</text>"#,
        w / 2.0,
        escape(&s.model_id),
        s.layer
    );
    let _ = writeln!(
        out,
        r##"<rect x="{m}" y="{m}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        w - 2.0 * m,
        h - 2.0 * m
    );
    let r1 = s.explained_ratio.first().copied().unwrap_or(0.0) * 100.0;
    let r2 = s.explained_ratio.get(1).copied().unwrap_or(0.0) * 100.0;
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">PC1 ({r1:.1}%)</text>"#, w / 2.0, h - 16.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">PC2 ({r2:.1}%)</text>"#,
        h / 2.0,
        h / 2.0
    );
    let n = s.points.len().max(1);
    for (i, p) in s.points.iter().enumerate() {
        let hue = 360.0 * i as f64 / n as f64;
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="hsl({hue:.1},70%,45%)"/>"#,
            sx(p[0]),
            sy(p[1])
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes the scatter SVG and a JSON summary with the same stem.
pub fn write_pca(file: &Path, out_svg: &Path, sweep_step: Option<f64>) -> Result<PcaSummary> {
    let s = pca_summary(file, sweep_step)?;
    write_atomic(out_svg, pca_svg(&s).as_bytes())?;
    let json = serde_json::to_string_pretty(&s).expect("summary serializes");
    write_atomic(&out_svg.with_extension("json"), json.as_bytes())?;
    Ok(s)
}

pub fn compare_reports(cls: &Path, mean: &Path) -> Result<PoolingComparison> {
    let (a, b) = (ProbeReport::load(cls)?, ProbeReport::load(mean)?);
    for (r, want, p) in [(&a, Pooling::Cls, cls), (&b, Pooling::MeanPatch, mean)] {
        if r.meta.pooling != want {
            log::warn!("{} has pooling {}", p.display(), pooling_name(r.meta.pooling));
        }
    }
    Ok(compare_pooling(&a.sweep()?, &b.sweep()?)?)
}
