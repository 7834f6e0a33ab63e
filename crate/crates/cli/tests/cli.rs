use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn amt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = amt(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code_of(dir: &Path, args: &[&str]) -> i32 {
    amt(dir, args).status.code().unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn leaves(tree: &Value) -> usize {
    let n = tree["vertices"].as_array().unwrap().len();
    let mut deg = vec![0; n];
    for e in tree["edges"].as_array().unwrap() {
        deg[e[0].as_u64().unwrap() as usize] += 1;
        deg[e[1].as_u64().unwrap() as usize] += 1;
    }
    deg.iter().filter(|&&d| d <= 1).count()
}

#[test]
fn gen_writes_trees() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["gen", "--model", "beta", "--beta", "0", "--n", "8", "--seed", "1", "-o", "t.json"]);
    assert!(out.starts_with("canonical "));
    let t = json(d.path().join("t.json"));
    assert_eq!(leaves(&t), 8);
    assert_eq!(t["meta"]["config"]["seed"], 1);

    ok(d.path(), &["gen", "--model", "comb", "--n", "3", "-o", "c.json"]);
    assert_eq!(leaves(&json(d.path().join("c.json"))), 3);
    ok(d.path(), &["gen", "--model", "symmetric", "--k", "2", "-o", "s.json"]);
    assert_eq!(leaves(&json(d.path().join("s.json"))), 4);
    ok(d.path(), &["gen", "--model", "beta", "--beta", "inf", "--n", "16", "--seed", "2", "-o", "i.json"]);
    ok(d.path(), &["gen", "--model", "beta", "--beta", "-2", "--n", "5", "--seed", "2", "-o", "m.json"]);
}

#[test]
fn gen_is_reproducible_across_threads() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["gen", "--model", "triangulation", "--n", "40", "--seed", "9", "-o", "t.json"]);
    let one = ok(d.path(), &["--threads", "1", "sample", "t.json", "--stat", "shape", "-m", "5", "--samples", "20000", "--seed", "4"]);
    let four = ok(d.path(), &["--threads", "4", "sample", "t.json", "--stat", "shape", "-m", "5", "--samples", "20000", "--seed", "4"]);
    assert_eq!(one, four);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(code_of(d.path(), &["gen", "--model", "beta", "--n", "8"]), 1);
    assert_eq!(code_of(d.path(), &["frobnicate"]), 1);
    assert_eq!(code_of(d.path(), &["gen", "--model", "beta", "--beta", "-3", "--n", "8", "--seed", "1"]), 2);
    assert_eq!(code_of(d.path(), &["code", "missing.json"]), 2);
    fs::write(
        d.path().join("cross.json"),
        r#"{"boundary":["0","1/4","1/2","3/4"],"triangles":[],"segments":[[0,2],[1,3]]}"#,
    )
    .unwrap();
    assert_eq!(code_of(d.path(), &["code", "cross.json"]), 2);
    fs::write(d.path().join("cycle.json"), r#"{"vertices":[{"id":0},{"id":1},{"id":2}],"edges":[[0,1],[1,2],[2,0]]}"#).unwrap();
    assert_eq!(code_of(d.path(), &["check", "--input", "cycle.json", "--suite", "axioms"]), 2);
    ok(d.path(), &["gen", "--model", "comb", "--n", "4", "-o", "c.json"]);
    assert_eq!(code_of(d.path(), &["sample", "c.json", "--stat", "shape", "-m", "3"]), 1);
}

#[test]
fn code_and_decode() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("box.json"), r#"{"boundary":["0","1/3","2/3"],"triangles":[[0,1,2]],"segments":[]}"#).unwrap();
    ok(d.path(), &["code", "box.json", "--verify", "-o", "box_tree.json"]);
    let t = json(d.path().join("box_tree.json"));
    assert_eq!(t["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(leaves(&t), 3);
    let arcs: Vec<&str> = t["arc_mass"].as_object().unwrap().values().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(arcs, vec!["1/3"; 3]);

    fs::write(d.path().join("point.json"), r#"{"vertices":[{"id":0}],"edges":[]}"#).unwrap();
    ok(d.path(), &["decode", "point.json", "-o", "point_tri.json"]);
    let p = json(d.path().join("point_tri.json"));
    assert!(p["triangles"].as_array().unwrap().is_empty());

    ok(d.path(), &["gen", "--model", "beta", "--beta", "1", "--n", "30", "--seed", "5", "-o", "b.json"]);
    ok(d.path(), &["decode", "b.json", "--verify", "--seed", "3", "-o", "b_tri.json"]);
    assert_eq!(json(d.path().join("b_tri.json"))["triangles"].as_array().unwrap().len(), 28);
    ok(d.path(), &["code", "b_tri.json", "--verify", "-o", "b_back.json"]);
}

#[test]
fn sample_outputs() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["gen", "--model", "symmetric", "--k", "2", "-o", "s.json"]);
    let csv = ok(d.path(), &["sample", "s.json", "--stat", "shape", "-m", "1", "--exact"]);
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].ends_with(",1,1,"), "{}", rows[1]);

    let mass: Value = serde_json::from_str(&ok(d.path(), &["sample", "s.json", "--stat", "mass", "-m", "3", "--exact"])).unwrap();
    let mut weights: Vec<String> = mass["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["weight"].as_str().unwrap().to_string())
        .collect();
    weights.sort();
    assert_eq!(weights, ["1/16", "1/8", "1/8", "1/8", "3/16", "3/16", "3/16"]);

    let phi: Value = serde_json::from_str(&ok(
        d.path(),
        &["sample", "s.json", "--stat", "distance", "-m", "4", "--samples", "200", "--trials", "4", "--seed", "1"],
    ))
    .unwrap();
    assert_eq!(phi["trials"].as_array().unwrap().len(), 4);
}

#[test]
fn compare_distances() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &["gen", "--model", "beta", "--n", "12", "--seed", "3", "-o", "t.json"]);
    let same: Value = serde_json::from_str(&ok(d.path(), &["compare", "t.json", "t.json", "--samples", "5000", "--seed", "1"])).unwrap();
    assert_eq!(same["distance"], 0.0);
    let w: Value = serde_json::from_str(&ok(d.path(), &["compare", "t.json", "t.json", "--metric", "wasserstein", "-m", "3", "--exact"])).unwrap();
    assert_eq!(w["distance"], 0.0);

    ok(d.path(), &["sample", "t.json", "--stat", "shape", "-m", "3", "--samples", "1000", "--seed", "1", "-o", "a.csv"]);
    ok(d.path(), &["sample", "t.json", "--stat", "shape", "-m", "4", "--samples", "1000", "--seed", "1", "-o", "b.csv"]);
    assert_eq!(code_of(d.path(), &["compare", "a.csv", "b.csv"]), 2);
    ok(d.path(), &["sample", "t.json", "--stat", "shape", "-m", "3", "--samples", "1000", "--seed", "2", "-o", "c.csv"]);
    let tv: Value = serde_json::from_str(&ok(d.path(), &["compare", "a.csv", "c.csv"])).unwrap();
    assert!(tv["distance"].as_f64().unwrap() < 0.1);

    ok(d.path(), &["decode", "t.json", "-o", "x.json"]);
    ok(d.path(), &["decode", "t.json", "--seed", "4", "-o", "y.json"]);
    let h: Value = serde_json::from_str(&ok(d.path(), &["compare", "x.json", "x.json", "--metric", "hausdorff"])).unwrap();
    assert_eq!(h["distance"], 0.0);
    ok(d.path(), &["compare", "x.json", "y.json", "--metric", "hausdorff"]);
}

#[test]
fn check_suites() {
    let d = TempDir::new().unwrap();
    let out = ok(d.path(), &["check", "--seed", "7", "--trials", "20"]);
    for suite in ["axioms", "oracle", "coding", "vc", "gc"] {
        assert!(out.contains(&format!("{suite:<8} pass")), "{out}");
    }
    assert_eq!(code_of(d.path(), &["check", "--trials", "5"]), 1);
    ok(d.path(), &["gen", "--model", "beta", "--n", "10", "--seed", "1", "-o", "t.json"]);
    ok(d.path(), &["check", "--input", "t.json", "--suite", "coding"]);
}

#[test]
fn render_svg() {
    let d = TempDir::new().unwrap();
    let tris = [[0, 7, 8], [0, 8, 11], [3, 5, 7], [1, 2, 3], [0, 1, 3], [8, 10, 11], [8, 9, 10], [5, 6, 7], [0, 3, 7], [3, 4, 5]];
    let boundary: Vec<String> = (0..12).map(|i| if i == 0 { "0".into() } else { format!("{i}/12") }).collect();
    let t = serde_json::json!({ "boundary": boundary, "triangles": tris, "segments": [] });
    fs::write(d.path().join("gon.json"), t.to_string()).unwrap();
    ok(d.path(), &["render", "gon.json", "--dual", "-o", "gon.svg"]);
    let svg = fs::read_to_string(d.path().join("gon.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("\"command\":\"render\""));

    ok(d.path(), &["gen", "--model", "comb", "--n", "6", "-o", "c.json"]);
    let direct = ok(d.path(), &["render", "c.json"]);
    assert!(direct.contains("<svg"));
}
