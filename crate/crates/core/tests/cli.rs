mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use semtl::embedding::EmbeddingMatrix;
use semtl::experiment::{read_report, Aggregate};
use semtl::reasoner::Closure;

fn semtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semtl")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = semtl(args);
    assert!(out.status.success(), "semtl {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(semtl(&["--help"]).status.code(), Some(0));
    assert_eq!(semtl(&[]).status.code(), Some(1));
    assert_eq!(semtl(&["reason", "--bogus"]).status.code(), Some(1));
    assert_eq!(semtl(&["reason", "--ontology", "/nonexistent.onto"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.onto");
    fs::write(&bad, "this is not an ontology\n").unwrap();
    assert_eq!(semtl(&["reason", "--ontology", p(&bad)]).status.code(), Some(2));

    let src = common::fixture("uk_ie/source");
    assert_eq!(semtl(&["train", "--source", p(&src), "--target", p(&src), "--out", p(&dir.path().join("m")), "--iters", "0"]).status.code(), Some(1));
    assert_eq!(semtl(&["sweep", "--ratios", "1.5", "--seeds", "1", "--out", p(&dir.path().join("sw"))]).status.code(), Some(1));
}

#[test]
fn uk_ie_reason_and_variability() {
    let dir = tempfile::tempdir().unwrap();
    let onto = dir.path().join("t1.onto");
    let text = ["shared.onto", "t1.onto"].map(|f| fs::read_to_string(common::fixture(&format!("uk_ie/target/{f}"))).unwrap());
    fs::write(&onto, text.join("\n")).unwrap();
    let out = dir.path().join("closure.txt");
    ok(&["reason", "--ontology", p(&onto), "--out", p(&out)]);
    let closure = Closure::from_text(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(closure.consistent);
    assert!(closure.set.contains(&"CA Road(r3)".parse().unwrap()));

    let v = ok(&["variability", "--source", p(&common::fixture("uk_ie/source")), "--target", p(&common::fixture("uk_ie/target"))]);
    let doc: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(doc["vO"].as_f64(), Some(2.0 / 3.0));
    assert_eq!(doc["vY"].as_f64(), Some(0.0));
    assert_eq!(doc["v"].as_f64(), Some(1.0 / 3.0));
}

#[test]
fn closed_loop_over_a_synthetic_pair() {
    let dir = tempfile::tempdir().unwrap();
    let d = |s: &str| dir.path().join(s);
    ok(&["synth", "--out", p(&d("pair")), "--seed", "4", "--ratio", "0.8"]);
    let (src, tgt) = (d("pair/source"), d("pair/target"));

    ok(&["embed", "--source", p(&src), "--target", p(&tgt), "--out", p(&d("emb.csv"))]);
    let emb = EmbeddingMatrix::read_csv(fs::File::open(d("emb.csv")).unwrap()).unwrap();
    assert!(!emb.is_empty());

    for algo in ["stadab", "tradaboost", "plain"] {
        let model = d(&format!("model-{algo}"));
        let report = d(&format!("{algo}.csv"));
        ok(&["train", "--algo", algo, "--source", p(&src), "--target", p(&tgt), "--out", p(&model), "--report", p(&report), "--iters", "30"]);
        let rows = read_report(fs::File::open(&report).unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].algo.as_str(), rows[0].case_id.as_str(), rows[0].consistency_ratio), (algo, "pair", 0.8));
        assert!(rows[0].n_iterations_run <= 30);

        let preds = d(&format!("{algo}-pred.csv"));
        ok(&["eval", "--model", p(&model), "--target", p(&tgt), "--out", p(&preds)]);
        let text = fs::read_to_string(&preds).unwrap();
        assert_eq!(text.lines().next(), Some("lso,truth,prediction"));
        assert_eq!(text.lines().count(), 31);
    }
    let agg = ok(&["report", p(&d("stadab.csv")), p(&d("tradaboost.csv")), p(&d("plain.csv"))]);
    let agg: Aggregate = serde_json::from_slice(&agg.stdout).unwrap();
    assert_eq!(agg.overall.len(), 3);
    assert_eq!(agg.deltas.len(), 6);
    assert_eq!(semtl(&["eval", "--model", p(&d("nowhere")), "--target", p(&tgt)]).status.code(), Some(1));
    // the model's target entailment does not exist in another domain
    let other = common::fixture("uk_ie/target");
    assert_eq!(semtl(&["eval", "--model", p(&d("model-stadab")), "--target", p(&other)]).status.code(), Some(2));
}

#[test]
fn full_sweep_row_and_bucket_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    // the full grid with short boosting and small domains keeps this fast
    ok(&[
        "sweep", "--ratios", "0.1:1.0:0.1", "--seeds", "10", "--algo", "all", "--out", p(&out), "--iters", "10",
        "--n-source", "30", "--n-target", "20",
    ]);
    let rows = read_report(fs::File::open(out.join("report.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 300);
    assert!(rows.iter().all(|r| r.n_iterations_run <= 10 && r.wall_time_ms == 0));
    let agg = ok(&["report", p(&out.join("report.csv"))]);
    let agg: Aggregate = serde_json::from_slice(&agg.stdout).unwrap();
    assert_eq!(agg.ratios.len(), 10);
    assert!(agg.ratios.iter().all(|b| b.count == 30));
}
