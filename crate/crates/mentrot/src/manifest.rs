//! Dataset directories: images, `manifest.jsonl` and `header.json`.
//!
//! ```text
//! {root}/{variant}/header.json
//! {root}/{variant}/manifest.jsonl
//! {root}/{variant}/images/{pair_id:06}_{a|b}.png
//! ```
//!
//! Images go first, then the header and side files, and the manifest last,
//! each through a rename. A directory with a manifest is complete.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use mentrot_core::dataset::{balanced_labels, plan_pair, render_pair, DatasetContext, PairPlan, Provenance, Variant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{write_atomic, Error, Result};
use crate::formats::{from_jsonl, to_jsonl, PolycubeRecord, SceneRecord};
use crate::images::{decode_png, encode_png};

pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_FILE: &str = "header.json";
pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SHAPES_FILE: &str = "shapes.jsonl";
pub const SCENES_FILE: &str = "scenes.jsonl";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageSource {
    /// Written by the builder.
    Rendered,
    /// Produced later from `scenes.jsonl` by an external renderer.
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format_version: u32,
    pub tool_version: String,
    pub variant: Variant,
    pub n_pairs: u64,
    pub master_seed: u64,
    pub config_hash: String,
    pub images: ImageSource,
    pub config: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair_id: u64,
    pub label: u8,
    /// Relative to the variant directory.
    pub image_a: String,
    pub image_b: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub records: Vec<PairRecord>,
}

impl DatasetManifest {
    /// Reads `manifest.jsonl` and the `header.json` beside it.
    pub fn load(manifest: &Path) -> Result<Self> {
        let dir = manifest.parent().unwrap_or(Path::new("."));
        let hpath = dir.join(HEADER_FILE);
        let htext = fs::read_to_string(&hpath).map_err(Error::io(&hpath))?;
        let header = serde_json::from_str(&htext).map_err(|e| Error::format(&hpath, e))?;
        let text = fs::read_to_string(manifest).map_err(Error::io(manifest))?;
        let records = from_jsonl(&text).map_err(|(line, e)| Error::format(manifest, format!("line {line}: {e}")))?;
        Ok(Self { header, records })
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records.iter().map(|r| r.label).collect()
    }
}

pub fn variant_dir(root: &Path, variant: &Variant) -> PathBuf {
    root.join(variant.to_string())
}

pub fn image_names(pair_id: u64) -> (String, String) {
    (format!("images/{pair_id:06}_a.png"), format!("images/{pair_id:06}_b.png"))
}

pub struct BuildOptions<'a> {
    pub root: &'a Path,
    pub variant: Variant,
    pub n_pairs: u64,
    pub config: &'a RunConfig,
    pub ctx: &'a DatasetContext,
    /// Worker threads; `None` uses every core.
    pub jobs: Option<usize>,
}

pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    b.build().map_err(|e| Error::Runtime(format!("thread pool: {e}")))
}

fn build_one(plan: PairPlan, ctx: &DatasetContext, dir: &Path) -> Result<PairRecord> {
    let (a, b) = image_names(plan.pair_id);
    if let Some((ia, ib)) = render_pair(&plan, ctx)? {
        for (name, img) in [(&a, ia), (&b, ib)] {
            let p = dir.join(name);
            fs::write(&p, encode_png(&img)).map_err(Error::io(&p))?;
        }
    }
    Ok(PairRecord {
        pair_id: plan.pair_id,
        label: plan.label,
        image_a: a,
        image_b: b,
        provenance: plan.provenance,
    })
}

/// Plans, renders and writes every pair; output bytes depend only on the
/// variant, seed, pair count and config, not on `jobs`.
pub fn build_dataset(opt: &BuildOptions) -> Result<DatasetManifest> {
    let seed = opt.config.seed;
    let labels = balanced_labels(opt.n_pairs, seed)?;
    let dir = variant_dir(opt.root, &opt.variant);
    let images = dir.join("images");
    fs::create_dir_all(&images).map_err(Error::io(&images))?;
    let _ = fs::remove_file(dir.join(MANIFEST_FILE));

    let pool = thread_pool(opt.jobs)?;
    let results: Vec<Result<PairRecord>> = pool.install(|| {
        labels
            .par_iter()
            .enumerate()
            .map(|(id, &label)| {
                let plan = plan_pair(&opt.variant, seed, id as u64, label, opt.ctx)?;
                build_one(plan, opt.ctx, &dir)
            })
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;

    let header = ManifestHeader {
        format_version: FORMAT_VERSION,
        tool_version: mentrot_core::VERSION.to_owned(),
        variant: opt.variant,
        n_pairs: opt.n_pairs,
        master_seed: seed,
        config_hash: opt.config.hash(),
        images: if opt.variant.has_images() { ImageSource::Rendered } else { ImageSource::External },
        config: opt.config.to_json(),
    };
    let mut htext = serde_json::to_string_pretty(&header).expect("header serializes");
    htext.push('\n');
    write_atomic(&dir.join(HEADER_FILE), htext.as_bytes())?;
    write_side_files(&dir, &records)?;
    write_atomic(&dir.join(MANIFEST_FILE), to_jsonl(&records).as_bytes())?;
    Ok(DatasetManifest { header, records })
}

fn write_side_files(dir: &Path, records: &[PairRecord]) -> Result<()> {
    let shapes: Vec<PolycubeRecord> = records
        .iter()
        .filter_map(|r| match &r.provenance {
            Provenance::Shape { shape_seed, cells, .. } => Some(PolycubeRecord::new(cells, *shape_seed)),
            _ => None,
        })
        .collect();
    if !shapes.is_empty() {
        write_atomic(&dir.join(SHAPES_FILE), to_jsonl(&shapes).as_bytes())?;
    }
    let scenes: Vec<SceneRecord> = records
        .iter()
        .filter_map(|r| match &r.provenance {
            Provenance::Scene { scene_seed, scene } => Some(SceneRecord {
                pair_id: r.pair_id,
                scene_seed: *scene_seed,
                image_a: r.image_a.clone(),
                image_b: r.image_b.clone(),
                scene: scene.clone(),
            }),
            _ => None,
        })
        .collect();
    if !scenes.is_empty() {
        write_atomic(&dir.join(SCENES_FILE), to_jsonl(&scenes).as_bytes())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingFile { pair_id: u64, path: String },
    Decode { pair_id: u64, path: String, reason: String },
    LabelImbalance { same: u64, mirrored: u64 },
    BadLabel { pair_id: u64, label: u8 },
    /// Ids are not exactly `0..n` in order.
    IdNotDense { position: u64, pair_id: u64 },
    CountMismatch { header: u64, records: u64 },
    ProvenanceMismatch { pair_id: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Check image files even when the header marks them external.
    pub require_images: bool,
}

/// All problems found; an empty list means the dataset is sound.
pub fn verify_manifest(m: &DatasetManifest, dir: &Path, opt: VerifyOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = m.records.len() as u64;
    if m.header.n_pairs != n {
        out.push(Violation::CountMismatch {
            header: m.header.n_pairs,
            records: n,
        });
    }
    let seen: BTreeSet<u64> = m.records.iter().map(|r| r.pair_id).collect();
    if let Some((pos, r)) = m.records.iter().enumerate().find(|(i, r)| r.pair_id != *i as u64) {
        out.push(Violation::IdNotDense {
            position: pos as u64,
            pair_id: r.pair_id,
        });
    } else if seen.len() as u64 != n {
        out.push(Violation::IdNotDense { position: n, pair_id: n });
    }
    let (mut same, mut mirrored) = (0u64, 0u64);
    for r in &m.records {
        match r.label {
            1 => same += 1,
            0 => mirrored += 1,
            l => out.push(Violation::BadLabel { pair_id: r.pair_id, label: l }),
        }
        if !r.provenance.matches(&m.header.variant) || r.provenance.implied_label() != r.label {
            out.push(Violation::ProvenanceMismatch { pair_id: r.pair_id });
        }
    }
    if same != mirrored {
        out.push(Violation::LabelImbalance { same, mirrored });
    }
    if m.header.images == ImageSource::Rendered || opt.require_images {
        let file_checks: Vec<Option<Violation>> = m
            .records
            .par_iter()
            .flat_map_iter(|r| [(r.pair_id, &r.image_a), (r.pair_id, &r.image_b)])
            .map(|(pair_id, rel)| check_image(pair_id, rel, dir))
            .collect();
        out.extend(file_checks.into_iter().flatten());
    }
    out
}

fn check_image(pair_id: u64, rel: &str, dir: &Path) -> Option<Violation> {
    let bytes = match fs::read(dir.join(rel)) {
        Ok(b) => b,
        Err(_) => {
            return Some(Violation::MissingFile {
                pair_id,
                path: rel.to_owned(),
            })
        }
    };
    match decode_png(&bytes) {
        Ok(_) => None,
        Err(e) => Some(Violation::Decode {
            pair_id,
            path: rel.to_owned(),
            reason: e.to_string(),
        }),
    }
}
