//! The `mentrot` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use mentrot_core::analysis::ChartOptions;
use mentrot_core::dataset::Variant;

use crate::analyze;
use crate::config::{Precision, RunConfig};
use crate::error::{write_atomic, Error, Result};
use crate::manifest::{build_dataset, variant_dir, verify_manifest, BuildOptions, DatasetManifest, VerifyOptions, MANIFEST_FILE};
use crate::report::{layer_files, run_probe, LayerSelection};

#[derive(Debug, Parser)]
#[command(name = "mentrot", version = mentrot_core::VERSION, about = "Mental-rotation stimuli, embedding probes and layer analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a balanced pair dataset.
    Gen(GenArgs),
    /// Check a dataset directory against its manifest.
    Verify(VerifyArgs),
    /// Cross-validate the Siamese probe on per-layer embeddings.
    Probe(ProbeArgs),
    /// Layer curves, PCA plots and pooling comparisons.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Print the embedding file and manifest schemas.
    Formats,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file (`.json` for JSON); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to every core.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// sm-<deg>, sm-free, text-normal, text-random, text-pseudo or photo-<deg>.
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub pairs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Word list for text-normal.
    #[arg(long)]
    pub wordlist: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Path to `manifest.jsonl` or its directory.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Also check images that an external renderer is expected to write.
    #[arg(long)]
    pub require_images: bool,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Directory of `layer_{k}.mreb` files, or one file.
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// `all`, `3`, `1,4,7` or `2-5`.
    #[arg(long, default_value = "all")]
    pub layers: LayerSelection,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_precision)]
    pub precision: Option<Precision>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Accuracy against layer for every report in a directory (SVG + CSV).
    Curve {
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
    /// First two principal components of one embedding file (SVG + JSON).
    Pca {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Treat rows as an azimuth sweep with this step in degrees.
        #[arg(long)]
        sweep_step: Option<f64>,
    },
    /// CLS against mean-patch pooling, layer by layer.
    Compare {
        #[arg(long)]
        cls: PathBuf,
        #[arg(long)]
        mean: PathBuf,
        /// JSON output; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_precision(s: &str) -> std::result::Result<Precision, String> {
    match s {
        "f32" => Ok(Precision::F32),
        "f64" => Ok(Precision::F64),
        _ => Err(format!("expected f32 or f64, got {s:?}")),
    }
}

pub const FORMATS: &str = r#"Embedding file (.mreb), little-endian:
  bytes 0..4    magic "MREB"
  bytes 4..8    u32 format version (1)
  bytes 8..12   u32 header length L
  bytes 12..12+L  UTF-8 JSON header:
      {"model_id": str, "layer": u32, "dim": u32, "count": u32,
       "pooling": "mean_patch" | "cls", ...extra keys kept verbatim}
  then count*dim f32 values, row-major. Row 2p is view a of pair p,
  row 2p+1 view b. All values must be finite.
  Files are named {variant}/{model_id}/layer_{k}.mreb.

Dataset directory {root}/{variant}/:
  header.json     {"format_version", "tool_version", "variant", "n_pairs",
                   "master_seed", "config_hash", "images": "rendered" | "external",
                   "config": {...}}
  manifest.jsonl  one record per line, pair_id 0..n-1 in order:
                  {"pair_id": u64, "label": 1 (same) | 0 (mirrored),
                   "image_a": "images/000000_a.png", "image_b": "images/000000_b.png",
                   "provenance": {"kind": "shape" | "text" | "scene", ...}}
  images/         PNG views, 8-bit gray or RGB
  shapes.jsonl    {"cells": [[x,y,z], ...], "seed": u64} per shape pair
  scenes.jsonl    scene spec per photo pair, with pair_id and image paths
"#;

/// Parses `argv` and runs; returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    RunConfig::load(common.config.as_deref())
}

pub fn run(cli: Cli) -> Result<()> {
    log::info!("mentrot {}", mentrot_core::VERSION);
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a),
        Command::Probe(a) => probe(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Formats => {
            print!("{FORMATS}");
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(v) = a.variant {
        cfg.dataset.variant = Some(v);
    }
    if let Some(n) = a.pairs {
        cfg.dataset.pairs = n;
    }
    if a.wordlist.is_some() {
        cfg.dataset.wordlist = a.wordlist;
    }
    let cfg = cfg.resolve()?;
    let variant = cfg
        .dataset
        .variant
        .ok_or_else(|| Error::Usage("no variant given (--variant or dataset.variant)".into()))?;
    if cfg.dataset.pairs == 0 || cfg.dataset.pairs % 2 == 1 {
        return Err(Error::Usage(format!("--pairs must be even and positive, got {}", cfg.dataset.pairs)));
    }
    log::info!("seed {} variant {variant} pairs {} config {}", cfg.seed, cfg.dataset.pairs, cfg.hash());
    let ctx = cfg.context()?;
    let m = build_dataset(&BuildOptions {
        root: &a.out,
        variant,
        n_pairs: cfg.dataset.pairs,
        config: &cfg,
        ctx: &ctx,
        jobs: a.common.jobs,
    })?;
    log::info!("wrote {} pairs to {}", m.records.len(), variant_dir(&a.out, &variant).display());
    Ok(())
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}

fn verify(a: VerifyArgs) -> Result<()> {
    let path = manifest_path(&a.manifest);
    let m = DatasetManifest::load(&path)?;
    log::info!("seed {} variant {} config {}", m.header.master_seed, m.header.variant, m.header.config_hash);
    let dir = path.parent().unwrap_or(Path::new("."));
    let v = verify_manifest(
        &m,
        dir,
        VerifyOptions {
            require_images: a.require_images,
        },
    );
    for item in &v {
        println!("{}", serde_json::to_string(item).expect("violation serializes"));
    }
    if v.is_empty() {
        log::info!("{} pairs, no violations", m.records.len());
        Ok(())
    } else {
        Err(Error::Runtime(format!("{} violations", v.len())))
    }
}

fn probe(a: ProbeArgs) -> Result<()> {
    let mut cfg = load_config(&a.common)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(f) = a.folds {
        cfg.probe.cv.folds = f;
    }
    if let Some(r) = a.repeats {
        cfg.probe.cv.repeats = r;
    }
    if let Some(p) = a.precision {
        cfg.probe.precision = p;
    }
    let cfg = cfg.resolve()?;
    log::info!("seed {} config {}", cfg.seed, cfg.hash());
    let manifest = DatasetManifest::load(&manifest_path(&a.manifest))?;
    let layers = layer_files(&a.embeddings, &a.layers)?;
    let report = run_probe(&layers, &manifest, &cfg, a.common.jobs)?;
    write_atomic(&a.out, report.to_json().as_bytes())?;
    for (k, r) in &report.layers {
        log::info!("layer {k}: acc {:.4} ± {:.4}", r.acc_mean, r.acc_se);
    }
    Ok(())
}

fn analyze_cmd(a: AnalyzeCommand) -> Result<()> {
    match a {
        AnalyzeCommand::Curve { reports, out, title } => {
            let mut opt = ChartOptions::default();
            if let Some(t) = title {
                opt.title = t;
            }
            let csv = analyze::write_curve(&reports, &out, &opt)?;
            log::info!("wrote {} and {}", out.display(), csv.display());
        }
        AnalyzeCommand::Pca { embeddings, out, sweep_step } => {
            let s = analyze::write_pca(&embeddings, &out, sweep_step)?;
            log::info!("PC1+PC2 explain {:.4} of the variance", s.cumulative_2);
        }
        AnalyzeCommand::Compare { cls, mean, out } => {
            let c = analyze::compare_reports(&cls, &mean)?;
            let json = serde_json::to_string_pretty(&c).expect("comparison serializes") + "\n";
            match out {
                Some(p) => write_atomic(&p, json.as_bytes())?,
                None => print!("{json}"),
            }
        }
    }
    Ok(())
}
