//! Probe runs over per-layer embedding files and their JSON reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mentrot_core::analysis::{LayerPoint, LayerSweep};
use mentrot_core::embed::Pooling;
use mentrot_core::probe::{check_counts, plan_splits, run_fold, CVReport, FoldEval, ProbeError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Precision, RunConfig};
use crate::error::{Error, Result};
use crate::manifest::{thread_pool, DatasetManifest};
use crate::mreb;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub model_id: String,
    pub pooling: Pooling,
    pub dim: usize,
    pub n_pairs: usize,
    /// Config hash of the dataset the embeddings were extracted from.
    pub dataset_config_hash: String,
    pub variant: String,
    pub precision: Precision,
    pub config: serde_json::Value,
}

/// `layers` is keyed by layer index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub meta: ReportMeta,
    pub layers: BTreeMap<u32, CVReport>,
}

impl ProbeReport {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn sweep(&self) -> Result<LayerSweep> {
        let points = self.layers.iter().map(|(&k, r)| LayerPoint::from_report(k, r)).collect();
        Ok(LayerSweep::new(self.meta.model_id.clone(), points)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayerSelection {
    All,
    Only(Vec<u32>),
}

impl std::str::FromStr for LayerSelection {
    type Err = String;

    /// `all`, a list `1,4,7` or a range `2-5`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(LayerSelection::All);
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let bad = || format!("bad layer selection {s:?}");
            match part.split_once('-') {
                Some((a, b)) => {
                    let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                    if a > b {
                        return Err(bad());
                    }
                    out.extend(a..=b);
                }
                None => out.push(part.trim().parse().map_err(|_| bad())?),
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(LayerSelection::Only(out))
    }
}

/// Lists the layer files under `embeddings`, which may be one `.mreb`
/// file or a directory of `layer_{k}.mreb`.
pub fn layer_files(embeddings: &Path, sel: &LayerSelection) -> Result<Vec<(u32, PathBuf)>> {
    let all = if embeddings.is_file() {
        let f = mreb::read(embeddings)?;
        vec![(f.set.layer, embeddings.to_path_buf())]
    } else {
        mreb::discover_layers(embeddings)?
    };
    let picked: Vec<_> = match sel {
        LayerSelection::All => all,
        LayerSelection::Only(want) => {
            for k in want {
                if !all.iter().any(|(l, _)| l == k) {
                    return Err(Error::Usage(format!("layer {k} not found under {}", embeddings.display())));
                }
            }
            all.into_iter().filter(|(l, _)| want.contains(l)).collect()
        }
    };
    if picked.is_empty() {
        return Err(Error::Usage(format!("no layer_*.mreb files under {}", embeddings.display())));
    }
    Ok(picked)
}

/// Cross-validates every layer, one layer in memory at a time. Folds run
/// in parallel; each fold is deterministic, so the report does not depend
/// on `jobs`.
pub fn run_probe(
    layers: &[(u32, PathBuf)],
    manifest: &DatasetManifest,
    config: &RunConfig,
    jobs: Option<usize>,
) -> Result<ProbeReport> {
    let labels = manifest.labels();
    let mut headers = Vec::with_capacity(layers.len());
    for (_, path) in layers {
        let h = mreb::read_header(path)?;
        if h.count != 2 * labels.len() {
            let e = ProbeError::CountMismatch {
                embeddings: h.count,
                pairs: labels.len(),
            };
            return Err(Error::Runtime(format!("{}: {e}", path.display())));
        }
        headers.push(h);
    }
    let cfg = &config.probe.train;
    let splits = plan_splits(&labels, &config.probe.cv, config.seed)?;
    let pool = thread_pool(jobs)?;
    let mut out = BTreeMap::new();
    for (_, path) in layers {
        let set = mreb::read(path)?.set;
        check_counts(&set, &labels).map_err(|e| Error::Runtime(format!("{}: {e}", path.display())))?;
        log::info!("layer {}: {} folds", set.layer, splits.len());
        let results: Vec<Result<FoldEval, ProbeError>> = pool.install(|| {
            splits
                .par_iter()
                .map(|s| match config.probe.precision {
                    Precision::F32 => run_fold::<f32>(&set, &labels, s, cfg),
                    Precision::F64 => run_fold::<f64>(&set, &labels, s, cfg),
                })
                .collect()
        });
        let tagged = splits.iter().zip(results).map(|(s, r)| (s.repeat, s.fold, r)).collect();
        let report = CVReport::aggregate(tagged);
        for f in &report.failures {
            log::warn!("layer {} repeat {} fold {}: {}", set.layer, f.repeat, f.fold, f.error);
        }
        out.insert(set.layer, report);
    }
    let first = &headers[0];
    let meta = ReportMeta {
        tool_version: mentrot_core::VERSION.to_owned(),
        seed: config.seed,
        config_hash: config.hash(),
        model_id: first.model_id.clone(),
        pooling: first.pooling,
        dim: first.dim,
        n_pairs: labels.len(),
        dataset_config_hash: manifest.header.config_hash.clone(),
        variant: manifest.header.variant.to_string(),
        precision: config.probe.precision,
        config: config.to_json(),
    };
    Ok(ProbeReport { meta, layers: out })
}
