use std::fs;
use std::path::Path;

use mentrot::config::RunConfig;
use mentrot::formats::{from_jsonl, PolycubeRecord, SceneRecord};
use mentrot::images::read_png;
use mentrot::manifest::{
    build_dataset, variant_dir, verify_manifest, BuildOptions, DatasetManifest, ImageSource, Violation, VerifyOptions,
    MANIFEST_FILE, SCENES_FILE, SHAPES_FILE,
};
use mentrot_core::dataset::{DatasetContext, Provenance, Variant};
use mentrot_core::textgen::TextCondition;

const CHECK: VerifyOptions = VerifyOptions { require_images: false };

fn small_config(seed: u64) -> RunConfig {
    let mut c = RunConfig {
        seed,
        ..RunConfig::default()
    };
    c.dataset.render.size = 64;
    c.dataset.text.size = 64;
    c
}

fn build(root: &Path, variant: Variant, n: u64, cfg: &RunConfig, jobs: Option<usize>) -> DatasetManifest {
    let ctx = cfg.context().unwrap();
    build_dataset(&BuildOptions {
        root,
        variant,
        n_pairs: n,
        config: cfg,
        ctx: &ctx,
        jobs,
    })
    .unwrap()
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn fresh_dataset_verifies_clean() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_config(3);
    let v = Variant::Text(TextCondition::Random);
    let m = build(root.path(), v, 20, &cfg, None);
    let dir = variant_dir(root.path(), &v);
    assert_eq!(m.records.len(), 20);
    assert_eq!(m.labels().iter().filter(|&&l| l == 1).count(), 10);
    let loaded = DatasetManifest::load(&dir.join(MANIFEST_FILE)).unwrap();
    assert_eq!(loaded, m);
    assert_eq!(loaded.header.config_hash, cfg.hash());
    assert_eq!(loaded.header.master_seed, 3);
    assert_eq!(verify_manifest(&loaded, &dir, CHECK), vec![]);
    assert_eq!(fs::read_dir(dir.join("images")).unwrap().count(), 40);
    let img = read_png(&dir.join(&m.records[0].image_a)).unwrap();
    assert_eq!((img.width, img.height), (64, 64));
}

#[test]
fn deleted_image_is_one_missing_file() {
    let root = tempfile::tempdir().unwrap();
    let v = Variant::ShepardMetzler(0.0);
    let m = build(root.path(), v, 10, &small_config(1), None);
    let dir = variant_dir(root.path(), &v);
    fs::remove_file(dir.join(&m.records[4].image_b)).unwrap();
    let got = verify_manifest(&m, &dir, CHECK);
    assert_eq!(
        got,
        vec![Violation::MissingFile {
            pair_id: 4,
            path: m.records[4].image_b.clone()
        }]
    );
}

#[test]
fn truncated_png_is_one_decode_violation() {
    let root = tempfile::tempdir().unwrap();
    let v = Variant::ShepardMetzlerFree;
    let m = build(root.path(), v, 10, &small_config(2), None);
    let dir = variant_dir(root.path(), &v);
    let p = dir.join(&m.records[7].image_a);
    let bytes = fs::read(&p).unwrap();
    fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
    let got = verify_manifest(&m, &dir, CHECK);
    assert_eq!(got.len(), 1, "{got:?}");
    assert!(matches!(&got[0], Violation::Decode { pair_id: 7, .. }));
}

#[test]
fn edited_manifests_are_caught() {
    let root = tempfile::tempdir().unwrap();
    let v = Variant::Text(TextCondition::Pseudo);
    let m = build(root.path(), v, 8, &small_config(4), None);
    let dir = variant_dir(root.path(), &v);

    let mut flipped = m.clone();
    flipped.records[2].label ^= 1;
    let got = verify_manifest(&flipped, &dir, CHECK);
    assert!(got.contains(&Violation::ProvenanceMismatch { pair_id: 2 }));
    assert!(got.iter().any(|x| matches!(x, Violation::LabelImbalance { .. })));

    let mut gap = m.clone();
    gap.records.remove(3);
    let got = verify_manifest(&gap, &dir, CHECK);
    assert!(got.contains(&Violation::IdNotDense { position: 3, pair_id: 4 }));
    assert!(got.contains(&Violation::CountMismatch { header: 8, records: 7 }));
}

#[test]
fn rebuild_is_byte_identical_for_any_job_count() {
    let (r1, r2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = small_config(11);
    let v = Variant::ShepardMetzler(15.0);
    build(r1.path(), v, 12, &cfg, Some(1));
    build(r2.path(), v, 12, &cfg, Some(3));
    let (a, b) = (dir_bytes(r1.path()), dir_bytes(r2.path()));
    assert_eq!(a.len(), 2 * 12 + 3);
    assert_eq!(a, b);
}

#[test]
fn different_seeds_give_different_datasets() {
    let (r1, r2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let v = Variant::Text(TextCondition::Random);
    let a = build(r1.path(), v, 10, &small_config(1), None);
    let b = build(r2.path(), v, 10, &small_config(2), None);
    assert_ne!(a.records, b.records);
}

#[test]
fn shape_pairs_write_polycube_lines() {
    let root = tempfile::tempdir().unwrap();
    let v = Variant::ShepardMetzlerFree;
    let m = build(root.path(), v, 6, &small_config(5), None);
    let text = fs::read_to_string(variant_dir(root.path(), &v).join(SHAPES_FILE)).unwrap();
    let shapes: Vec<PolycubeRecord> = from_jsonl(&text).unwrap();
    assert_eq!(shapes.len(), 6);
    for (s, r) in shapes.iter().zip(&m.records) {
        let Provenance::Shape { shape_seed, cells, .. } = &r.provenance else { panic!() };
        assert_eq!(s.seed, *shape_seed);
        let mut want = cells.clone();
        want.sort();
        assert_eq!(s.to_cells(), want);
        assert!(s.cells.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn photo_pairs_defer_images_to_scene_lines() {
    let root = tempfile::tempdir().unwrap();
    let v = Variant::Photo(30.0);
    let m = build(root.path(), v, 8, &small_config(6), None);
    let dir = variant_dir(root.path(), &v);
    assert_eq!(m.header.images, ImageSource::External);
    assert_eq!(fs::read_dir(dir.join("images")).unwrap().count(), 0);
    let scenes: Vec<SceneRecord> = from_jsonl(&fs::read_to_string(dir.join(SCENES_FILE)).unwrap()).unwrap();
    assert_eq!(scenes.len(), 8);
    for (s, r) in scenes.iter().zip(&m.records) {
        assert_eq!((s.pair_id, &s.image_a), (r.pair_id, &r.image_a));
        assert_eq!(u8::from(!s.scene.mirrored), r.label);
    }
    assert_eq!(verify_manifest(&m, &dir, CHECK), vec![]);
    let strict = verify_manifest(&m, &dir, VerifyOptions { require_images: true });
    assert_eq!(strict.len(), 16);
}

#[test]
fn odd_pair_counts_are_rejected() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_config(0);
    let ctx = DatasetContext::default();
    let r = build_dataset(&BuildOptions {
        root: root.path(),
        variant: Variant::ShepardMetzlerFree,
        n_pairs: 7,
        config: &cfg,
        ctx: &ctx,
        jobs: None,
    });
    assert!(r.is_err());
    assert!(!variant_dir(root.path(), &Variant::ShepardMetzlerFree).join(MANIFEST_FILE).exists());
}

#[test]
fn text_normal_needs_a_word_list() {
    let root = tempfile::tempdir().unwrap();
    let words = root.path().join("words.txt");
    fs::write(&words, "house\ntable\nriver\nstone\nlamp\ngarden\n").unwrap();
    let mut cfg = small_config(8);
    let v = Variant::Text(TextCondition::Normal);
    let ctx = cfg.context().unwrap();
    let missing = build_dataset(&BuildOptions {
        root: root.path(),
        variant: v,
        n_pairs: 4,
        config: &cfg,
        ctx: &ctx,
        jobs: None,
    });
    assert!(missing.is_err());
    cfg.dataset.wordlist = Some(words);
    let m = build(root.path(), v, 4, &cfg, None);
    for r in &m.records {
        let Provenance::Text { text, .. } = &r.provenance else { panic!() };
        assert!(["house", "table", "river", "stone", "lamp", "garden"].contains(&text.as_str()));
    }
}
