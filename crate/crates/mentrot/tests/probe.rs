use std::fs;
use std::path::{Path, PathBuf};

use mentrot::analyze::{compare_reports, pca_summary, write_curve, write_pca};
use mentrot::config::{Precision, RunConfig};
use mentrot::manifest::{build_dataset, BuildOptions, DatasetManifest};
use mentrot::mreb;
use mentrot::report::{layer_files, run_probe, LayerSelection, ProbeReport};
use mentrot_core::analysis::{parse_curve_csv, ChartOptions};
use mentrot_core::dataset::Variant;
use mentrot_core::embed::{EmbeddingSet, Pooling};
use mentrot_core::rng::Rng;
use mentrot_core::synthetic::{rotation_sweep, separable_for_labels};
use mentrot_core::textgen::TextCondition;
use serde_json::Map;

fn quick_config(seed: u64) -> RunConfig {
    let mut c = RunConfig {
        seed,
        ..RunConfig::default()
    };
    c.dataset.text.size = 32;
    c.probe.cv.folds = 3;
    c.probe.cv.repeats = 1;
    let t = &mut c.probe.train;
    t.max_epochs = 40;
    t.warmup_epochs = 5;
    t.patience = 15;
    t.hidden = 16;
    t.proj = 8;
    t.batch_size = 32;
    t.lr = 1e-2;
    c.resolve().unwrap()
}

/// Dataset plus a noise layer 0 and a separable layer 1.
fn fixture(root: &Path, pooling: Pooling) -> (DatasetManifest, PathBuf) {
    let cfg = quick_config(2);
    let ctx = cfg.context().unwrap();
    let m = build_dataset(&BuildOptions {
        root,
        variant: Variant::Text(TextCondition::Random),
        n_pairs: 120,
        config: &cfg,
        ctx: &ctx,
        jobs: Some(1),
    })
    .unwrap();
    let emb = root.join("emb").join(format!("{pooling:?}"));
    let labels = m.labels();
    let mut rng = Rng::new(5);
    let noise: Vec<f32> = (0..labels.len() * 2 * 6).map(|_| rng.normal() as f32).collect();
    let l0 = EmbeddingSet::new("toy", 0, pooling, 6, noise).unwrap();
    let s = separable_for_labels(&labels, 6, 9).unwrap();
    let l1 = EmbeddingSet::new("toy", 1, pooling, 6, s.data().to_vec()).unwrap();
    for l in [l0, l1] {
        mreb::write(&emb.join(format!("layer_{}.mreb", l.layer)), &l, &Map::new()).unwrap();
    }
    (m, emb)
}

#[test]
fn reports_are_job_count_independent_and_well_formed() {
    let root = tempfile::tempdir().unwrap();
    let (m, emb) = fixture(root.path(), Pooling::MeanPatch);
    let cfg = quick_config(4);
    let layers = layer_files(&emb, &LayerSelection::All).unwrap();
    let a = run_probe(&layers, &m, &cfg, Some(1)).unwrap();
    let b = run_probe(&layers, &m, &cfg, Some(2)).unwrap();
    assert_eq!(a.to_json(), b.to_json());

    assert_eq!(a.layers.len(), 2);
    assert_eq!(a.meta.config_hash, cfg.hash());
    assert_eq!(a.meta.dataset_config_hash, m.header.config_hash);
    assert_eq!(a.meta.precision, Precision::F64);
    let l1 = &a.layers[&1];
    assert_eq!(l1.per_fold.len(), 3);
    assert!(l1.acc_mean > 0.9, "{}", l1.acc_mean);
    assert!(a.layers[&0].acc_mean < 0.75, "{}", a.layers[&0].acc_mean);

    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    for key in ["acc_mean", "acc_se", "ce_mean", "ce_se", "per_fold"] {
        assert!(json["layers"]["1"].get(key).is_some(), "{key}");
    }
    let path = root.path().join("r.json");
    fs::write(&path, a.to_json()).unwrap();
    assert_eq!(ProbeReport::load(&path).unwrap(), a);

    let only = layer_files(&emb, &"1".parse().unwrap()).unwrap();
    let c = run_probe(&only, &m, &cfg, None).unwrap();
    assert_eq!(c.layers[&1], a.layers[&1]);
    assert!(layer_files(&emb, &"7".parse().unwrap()).is_err());
}

#[test]
fn f32_mode_agrees_closely() {
    let root = tempfile::tempdir().unwrap();
    let (m, emb) = fixture(root.path(), Pooling::MeanPatch);
    let mut cfg = quick_config(4);
    let layers = layer_files(&emb, &"1".parse().unwrap()).unwrap();
    let a = run_probe(&layers, &m, &cfg, None).unwrap();
    cfg.probe.precision = Precision::F32;
    let b = run_probe(&layers, &m, &cfg, None).unwrap();
    assert!((a.layers[&1].acc_mean - b.layers[&1].acc_mean).abs() < 0.05);
}

#[test]
fn curve_csv_round_trips_report_values() {
    let root = tempfile::tempdir().unwrap();
    let (m, emb) = fixture(root.path(), Pooling::MeanPatch);
    let cfg = quick_config(1);
    let rep = run_probe(&layer_files(&emb, &LayerSelection::All).unwrap(), &m, &cfg, None).unwrap();
    let reports = root.path().join("reports");
    fs::create_dir_all(&reports).unwrap();
    fs::write(reports.join("toy.json"), rep.to_json()).unwrap();
    let svg = root.path().join("fig.svg");
    let csv = write_curve(&reports, &svg, &ChartOptions::default()).unwrap();
    let sweeps = parse_curve_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(sweeps.len(), 1);
    for p in &sweeps[0].points {
        let r = &rep.layers[&p.layer];
        assert_eq!((p.acc_mean, p.acc_se, p.ce_mean, p.ce_se), (r.acc_mean, r.acc_se, r.ce_mean, r.ce_se));
    }
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.contains("toy"));
    let again = root.path().join("again.svg");
    write_curve(&reports, &again, &ChartOptions::default()).unwrap();
    assert_eq!(fs::read(&svg).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn pooling_comparison_reads_two_reports() {
    let root = tempfile::tempdir().unwrap();
    let (m, mean_dir) = fixture(root.path(), Pooling::MeanPatch);
    let (_, cls_dir) = fixture(root.path(), Pooling::Cls);
    let cfg = quick_config(3);
    let all = LayerSelection::All;
    let mean = run_probe(&layer_files(&mean_dir, &all).unwrap(), &m, &cfg, None).unwrap();
    let cls = run_probe(&layer_files(&cls_dir, &all).unwrap(), &m, &cfg, None).unwrap();
    assert_eq!(cls.meta.pooling, Pooling::Cls);
    let (pm, pc) = (root.path().join("mean.json"), root.path().join("cls.json"));
    fs::write(&pm, mean.to_json()).unwrap();
    fs::write(&pc, cls.to_json()).unwrap();
    let c = compare_reports(&pc, &pm).unwrap();
    assert_eq!(c.rows.len(), 2);
    // Same vectors under both labels give identical curves.
    assert!(c.rows.iter().all(|r| r.diff == 0.0));
}

#[test]
fn pca_of_a_sweep_file_finds_the_circle() {
    let root = tempfile::tempdir().unwrap();
    let (data, _) = rotation_sweep(2.0, 1.0, 0.5, 5);
    let set = EmbeddingSet::new("sweep", 4, Pooling::MeanPatch, 8, data.iter().map(|&v| v as f32).collect()).unwrap();
    let f = root.path().join("layer_4.mreb");
    mreb::write(&f, &set, &Map::new()).unwrap();
    let s = pca_summary(&f, Some(2.0)).unwrap();
    assert_eq!(s.n, 180);
    assert!(s.cumulative_2 > 0.99, "{}", s.cumulative_2);
    assert!(s.closure.unwrap() < 0.05);
    assert!(s.angular_correlation.unwrap() > 0.99);
    let svg = root.path().join("pca.svg");
    write_pca(&f, &svg, None).unwrap();
    assert_eq!(fs::read_to_string(&svg).unwrap().matches("<circle").count(), 180);
    assert!(svg.with_extension("json").exists());
}
