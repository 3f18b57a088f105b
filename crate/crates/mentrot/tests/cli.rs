use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mentrot::mreb;
use mentrot_core::embed::{EmbeddingSet, Pooling};
use serde_json::Map;

fn mentrot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mentrot"))
        .args(args)
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_text_random_writes_200_images_and_a_manifest() {
    let out = tempfile::tempdir().unwrap();
    let r = mentrot(&["gen", "--variant", "text-random", "--pairs", "100", "--seed", "7", "--out", s(out.path())]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let dir = out.path().join("text-random");
    assert_eq!(fs::read_dir(dir.join("images")).unwrap().count(), 200);
    let manifest = fs::read_to_string(dir.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest.lines().count(), 100);
    let log = String::from_utf8_lossy(&r.stderr);
    assert!(log.contains("seed 7"), "{log}");
    assert!(log.contains(mentrot_core::VERSION), "{log}");

    let v = mentrot(&["verify", "--manifest", s(&dir.join("manifest.jsonl"))]);
    assert_eq!(v.status.code(), Some(0));
    assert!(v.stdout.is_empty());
    fs::remove_file(dir.join("images/000003_a.png")).unwrap();
    let v = mentrot(&["verify", "--manifest", s(&dir)]);
    assert_eq!(v.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&v.stdout).lines().count(), 1);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["frobnicate"],
        vec![],
        vec!["gen", "--pairs", "10"],
        vec!["gen", "--variant", "sm-x", "--out", "x"],
        vec!["probe", "--embeddings", "e", "--manifest", "m", "--out", "o", "--precision", "f16"],
    ] {
        let r = mentrot(&args);
        assert_eq!(r.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&r.stderr).contains("Usage"), "{args:?}");
    }
    let out = tempfile::tempdir().unwrap();
    let r = mentrot(&["gen", "--variant", "sm-free", "--pairs", "7", "--out", s(out.path())]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn help_version_and_formats_exit_0() {
    assert_eq!(mentrot(&["--help"]).status.code(), Some(0));
    let v = mentrot(&["--version"]);
    assert!(String::from_utf8_lossy(&v.stdout).contains(mentrot_core::VERSION));
    let f = mentrot(&["formats"]);
    assert_eq!(f.status.code(), Some(0));
    let text = String::from_utf8_lossy(&f.stdout);
    assert!(text.contains("MREB") && text.contains("manifest.jsonl"));
}

#[test]
fn probe_rejects_mismatched_counts_with_exit_2() {
    let out = tempfile::tempdir().unwrap();
    let r = mentrot(&["gen", "--variant", "sm-0", "--pairs", "10", "--seed", "1", "--out", s(out.path())]);
    assert_eq!(r.status.code(), Some(0));
    let emb = out.path().join("emb");
    // 12 vectors for 10 pairs.
    let set = EmbeddingSet::new("m", 0, Pooling::MeanPatch, 4, vec![0.5; 48]).unwrap();
    mreb::write(&emb.join("layer_0.mreb"), &set, &Map::new()).unwrap();
    let r = mentrot(&[
        "probe",
        "--embeddings",
        s(&emb),
        "--manifest",
        s(&out.path().join("sm-0/manifest.jsonl")),
        "--out",
        s(&out.path().join("r.json")),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("count mismatch"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("run.toml");
    fs::write(&cfg, "seed = 3\n[dataset]\nvariant = \"text-pseudo\"\npairs = 6\n[dataset.text]\nsize = 48\n").unwrap();
    let r = mentrot(&["gen", "--config", s(&cfg), "--pairs", "4", "--out", s(out.path())]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("text-pseudo/header.json")).unwrap()).unwrap();
    assert_eq!(header["n_pairs"], 4);
    assert_eq!(header["master_seed"], 3);
    assert_eq!(header["config"]["dataset"]["text"]["size"], 48);
    assert_eq!(header["config_hash"].as_str().unwrap().len(), 64);
}
