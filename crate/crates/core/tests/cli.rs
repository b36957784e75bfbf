use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentopic"))
        .args(args)
        .current_dir(dir)
        .env_remove("SENTOPIC_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path) {
    ok(
        dir,
        &["prepare", "synth", "--k", "30", "--docs", "20", "--min-len", "5", "--max-len", "10", "--seed", "3", "--out", "data"],
    );
}

fn train(dir: &Path, epochs: &str, sigma: &str) {
    ok(
        dir,
        &["train", "--data", "data", "--out", "model.txt", "--mode", "joint", "--hidden", "10", "--epochs", epochs, "--sigma", sigma],
    );
}

#[test]
fn usage_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    let zero_hidden = run(tmp.path(), &["train", "--data", "data", "--out", "m.txt", "--mode", "rs", "--hidden", "0"]);
    assert_eq!(zero_hidden.status.code(), Some(1));
    let missing = run(tmp.path(), &["train", "--data", "nowhere", "--out", "m.txt", "--mode", "rs", "--hidden", "3"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn vocabulary_mismatch_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    train(tmp.path(), "3", "0.1");
    ok(tmp.path(), &["prepare", "synth", "--k", "40", "--docs", "5", "--out", "other"]);
    let out = run(tmp.path(), &["eval", "perplexity", "--model", "model.txt", "--data", "other", "--out", "p.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn retrieval_writes_one_row_per_depth() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    train(tmp.path(), "3", "0.1");
    ok(tmp.path(), &["eval", "retrieve", "--model", "model.txt", "--data", "data", "--k-grid", "1,5,10", "--out", "r.csv"]);
    let csv = fs::read_to_string(tmp.path().join("r.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "k,recall,precision");
    assert_eq!(rows.len(), 4);
}

#[test]
fn untrained_zero_model_has_perplexity_k() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    train(tmp.path(), "0", "0");
    let stdout = ok(tmp.path(), &["eval", "perplexity", "--model", "model.txt", "--data", "data", "--ais-runs", "10", "--ais-temps", "100", "--out", "p.csv"]);
    let ppl: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("perplexity "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((ppl - 30.0).abs() < 1e-6, "{ppl}");
}

#[test]
fn topics_tags_ten_units() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path());
    train(tmp.path(), "3", "0.1");
    ok(tmp.path(), &["eval", "topics", "--model", "model.txt", "--data", "data", "--lexicon", "data/lexicon.txt", "--out", "t.csv"]);
    let csv = fs::read_to_string(tmp.path().join("t.csv")).unwrap();
    let tagged = csv
        .lines()
        .filter(|l| l.contains(",positive,") || l.contains(",negative,"))
        .count();
    assert_eq!(tagged, 10);
}

#[test]
fn prepare_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path());
    synth(b.path());
    for f in ["vocab.txt", "train.docs", "test.docs", "lexicon.txt"] {
        assert_eq!(
            fs::read(a.path().join("data").join(f)).unwrap(),
            fs::read(b.path().join("data").join(f)).unwrap(),
            "{f}"
        );
    }
}
