use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::probe::CVReport;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerPoint {
    pub layer: u32,
    pub acc_mean: f64,
    pub acc_se: f64,
    pub ce_mean: f64,
    pub ce_se: f64,
}

impl LayerPoint {
    pub fn from_report(layer: u32, r: &CVReport) -> Self {
        Self { layer, acc_mean: r.acc_mean, acc_se: r.acc_se, ce_mean: r.ce_mean, ce_se: r.ce_se }
    }
}

/// Per-layer summaries of one model, in layer order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSweep {
    pub model_id: String,
    pub points: Vec<LayerPoint>,
}

impl LayerSweep {
    /// Sorts by layer and checks the layers run 0, 1, ... without gaps.
    pub fn new(model_id: impl Into<String>, mut points: Vec<LayerPoint>) -> Result<Self, AnalysisError> {
        points.sort_by_key(|p| p.layer);
        for (i, p) in points.iter().enumerate() {
            if p.layer as usize != i {
                return Err(AnalysisError::LayerGap { expected: i as u32, found: p.layer });
            }
        }
        if points.is_empty() {
            return Err(AnalysisError::EmptySweep);
        }
        Ok(Self { model_id: model_id.into(), points })
    }

    pub fn best(&self) -> &LayerPoint {
        self.points
            .iter()
            .reduce(|a, b| if b.acc_mean > a.acc_mean { b } else { a })
            .expect("sweep is non-empty")
    }
}

pub const CURVE_CSV_HEADER: &str = "model_id,layer,acc_mean,acc_se,ce_mean,ce_se";

/// One row per (model, layer); floats use shortest round-trip formatting.
pub fn curve_csv(sweeps: &[LayerSweep]) -> String {
    let mut s = String::from(CURVE_CSV_HEADER);
    s.push('\n');
    for sw in sweeps {
        for p in &sw.points {
            let _ = writeln!(s, "{},{},{:?},{:?},{:?},{:?}", sw.model_id, p.layer, p.acc_mean, p.acc_se, p.ce_mean, p.ce_se);
        }
    }
    s
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<LayerSweep>, AnalysisError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CURVE_CSV_HEADER => {}
        _ => return Err(AnalysisError::Csv { line: 1, reason: "unexpected header" }),
    }
    let mut sweeps: Vec<(String, Vec<LayerPoint>)> = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = |reason| AnalysisError::Csv { line: i + 1, reason };
        if f.len() != 6 {
            return Err(bad("expected 6 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let point = LayerPoint {
            layer: f[1].parse().map_err(|_| bad("bad layer"))?,
            acc_mean: num(f[2])?,
            acc_se: num(f[3])?,
            ce_mean: num(f[4])?,
            ce_se: num(f[5])?,
        };
        match sweeps.iter_mut().find(|(m, _)| m == f[0]) {
            Some((_, pts)) => pts.push(point),
            None => sweeps.push((f[0].to_string(), alloc::vec![point])),
        }
    }
    sweeps.into_iter().map(|(m, p)| LayerSweep::new(m, p)).collect()
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
pub struct ChartOptions {
    pub width: f64,
    pub height: f64,
    pub title: String,
    pub y_label: String,
    /// Fixed y range; `None` fits the data.
    pub y_range: Option<(f64, f64)>,
    /// Dashed horizontal reference line, e.g. chance level.
    pub reference: Option<f64>,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 400.0,
            title: String::from("Test accuracy across layers"),
            y_label: String::from("accuracy"),
            y_range: None,
            reference: Some(0.5),
        }
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = libm::pow(10.0, libm::floor(libm::log10(raw)));
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// SVG line chart of accuracy against layer, one mean line and one ±SE
/// band per sweep. Output depends only on the inputs.
pub fn curve_svg(sweeps: &[LayerSweep], opt: &ChartOptions) -> Result<String, AnalysisError> {
    if sweeps.is_empty() {
        return Err(AnalysisError::EmptySweep);
    }
    let (ml, mr, mt, mb) = (60.0, 20.0, 36.0, 48.0);
    let (pw, ph) = (opt.width - ml - mr, opt.height - mt - mb);
    let max_layer = sweeps.iter().map(|s| s.points.len() - 1).max().unwrap_or(0) as f64;
    let (y0, y1) = opt.y_range.unwrap_or_else(|| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in sweeps.iter().flat_map(|s| &s.points) {
            lo = lo.min(p.acc_mean - p.acc_se);
            hi = hi.max(p.acc_mean + p.acc_se);
        }
        if let Some(r) = opt.reference {
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(hi - lo > 1e-9) {
            lo -= 0.05;
            hi += 0.05;
        }
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    });
    let sx = |l: f64| ml + if max_layer > 0.0 { l / max_layer * pw } else { pw / 2.0 };
    let sy = |v: f64| mt + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#,
        w = opt.width,
        h = opt.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#, opt.width / 2.0, escape(&opt.title));

    let step = nice_step(y1 - y0);
    let mut t = libm::ceil(y0 / step) * step;
    while t <= y1 + 1e-12 {
        let y = sy(t);
        let _ = writeln!(s, r##"<line x1="{ml:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, ml + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, ml - 6.0, y + 4.0, fmt_tick(t, step));
        t += step;
    }
    let xstep = libm::fmax(1.0, libm::ceil(nice_step(max_layer.max(1.0))));
    let mut l = 0.0;
    while l <= max_layer + 1e-9 {
        let x = sx(l);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{l:.0}</text>"#, mt + ph + 16.0);
        l += xstep;
    }
    let _ = writeln!(s, r##"<rect x="{ml:.2}" y="{mt:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">layer</text>"#, ml + pw / 2.0, opt.height - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        mt + ph / 2.0,
        mt + ph / 2.0,
        escape(&opt.y_label)
    );
    if let Some(r) = opt.reference {
        if r >= y0 && r <= y1 {
            let y = sy(r);
            let _ = writeln!(s, r##"<line x1="{ml:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 4"/>"##, ml + pw);
        }
    }

    for (k, sw) in sweeps.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut band = String::new();
        for p in &sw.points {
            let _ = write!(band, "{:.2},{:.2} ", sx(p.layer as f64), sy(p.acc_mean + p.acc_se));
        }
        for p in sw.points.iter().rev() {
            let _ = write!(band, "{:.2},{:.2} ", sx(p.layer as f64), sy(p.acc_mean - p.acc_se));
        }
        let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, band.trim_end());
        let line: Vec<String> =
            sw.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.layer as f64), sy(p.acc_mean))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for p in &sw.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(p.layer as f64), sy(p.acc_mean));
        }
        let ly = mt + 14.0 + 16.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, ml + 10.0, ml + 28.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, ml + 34.0, ly + 4.0, escape(&sw.model_id));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_tick(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-libm::floor(libm::log10(step))) as usize };
    let v = if v.abs() < step * 1e-6 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Per-layer accuracy of CLS versus mean-patch pooling for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolingComparison {
    pub model_id: String,
    pub rows: Vec<PoolingRow>,
    pub best_cls_layer: u32,
    pub best_mean_layer: u32,
    /// Layers where the mean-patch accuracy is higher.
    pub mean_wins: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolingRow {
    pub layer: u32,
    pub cls_acc: f64,
    pub cls_se: f64,
    pub mean_acc: f64,
    pub mean_se: f64,
    /// `mean_acc - cls_acc`.
    pub diff: f64,
}

pub fn compare_pooling(cls: &LayerSweep, mean: &LayerSweep) -> Result<PoolingComparison, AnalysisError> {
    if cls.points.len() != mean.points.len() {
        return Err(AnalysisError::SweepLengthMismatch { left: cls.points.len(), right: mean.points.len() });
    }
    let rows: Vec<PoolingRow> = cls
        .points
        .iter()
        .zip(&mean.points)
        .map(|(c, m)| PoolingRow {
            layer: c.layer,
            cls_acc: c.acc_mean,
            cls_se: c.acc_se,
            mean_acc: m.acc_mean,
            mean_se: m.acc_se,
            diff: m.acc_mean - c.acc_mean,
        })
        .collect();
    Ok(PoolingComparison {
        model_id: mean.model_id.clone(),
        best_cls_layer: cls.best().layer,
        best_mean_layer: mean.best().layer,
        mean_wins: rows.iter().filter(|r| r.diff > 0.0).count(),
        rows,
    })
}
