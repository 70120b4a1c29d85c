use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quanthelly"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn squares(dir: &Path) -> String {
    let sq = |x: i64| json!({"vertices": [[x, 0], [x + 2, 0], [x + 2, 2], [x, 2]]});
    write(dir, "squares.json", &json!({"schema": "quanthelly.family/1", "members": [sq(0), sq(1), sq(2)]}))
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");
    let params = r#"{"n": 6}"#;
    for (out, svg) in [(&a, &svg_a), (&b, &svg_b)] {
        let o = run(&[
            "gen", "--kind", "random-polygons", "--params", params, "--seed", "7",
            "--out", out.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&svg_a).unwrap(), fs::read(&svg_b).unwrap());
    let doc: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(doc["schema"], "quanthelly.family/1");
    assert_eq!(doc["members"].as_array().unwrap().len(), 6);
}

#[test]
fn gen_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", &json!({"schema": "quanthelly.generator/1", "kind": "bkp-counterexample", "side": "1/10"}));
    let o = run(&["gen", "--spec", &spec]);
    assert!(o.status.success());
    let doc = stdout_json(&o);
    assert_eq!(doc["members"].as_array().unwrap().len(), 4);
}

#[test]
fn helly_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("dw.json");
    assert!(run(&["gen", "--kind", "doignon-witness", "--out", fam.to_str().unwrap()]).status.success());
    let f = fam.to_str().unwrap();
    let o = run(&["helly-check", "--family", f, "--h", "3", "--measure", "integer"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["hypothesis"], true);
    assert_eq!(r["conclusion"], false);
    let o = run(&["helly-check", "--family", f, "--h", "4", "--measure", "integer"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pierce_three_squares() {
    let dir = tempfile::tempdir().unwrap();
    let fam = squares(dir.path());
    let cert = dir.path().join("cert.json");
    let o = run(&[
        "pierce", "--family", &fam, "--p", "3", "--q", "2", "--lambda", "1", "--eps", "1/8",
        "--out", cert.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = stdout_json(&o);
    assert_eq!(c["schema"], "quanthelly.certificate/1");
    assert!(c["witnesses"].as_array().unwrap().len() <= 2);
    assert!(cert.exists());
}

#[test]
fn pierce_hypothesis_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let sq = |x: i64| json!({"vertices": [[x, 0], [x + 1, 0], [x + 1, 1], [x, 1]]});
    let fam = write(dir.path(), "far.json", &json!({"members": [sq(0), sq(5), sq(10)]}));
    let o = run(&["pierce", "--family", &fam, "--p", "3", "--q", "2", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pierce_pool_insufficient_exits_3() {
    // (2,1) holds since the square alone is large, but the small triangle
    // contains no large candidate.
    let dir = tempfile::tempdir().unwrap();
    let fam = write(dir.path(), "mixed.json", &json!({"members": [
        {"vertices": [[0, 0], [1, 0], [0, 1]]},
        {"vertices": [[0, 0], [2, 0], [2, 2], [0, 2]]}
    ]}));
    let o = run(&["pierce", "--family", &fam, "--p", "2", "--q", "1", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn floating_body_with_svg() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "k.json", &json!({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}));
    let svg = dir.path().join("fb.svg");
    let o = run(&["floating-body", "--body", &body, "--eps", "1/4", "--dirs", "axis", "--svg", svg.to_str().unwrap()]);
    assert!(o.status.success());
    let r = stdout_json(&o);
    assert_eq!(r["delta"], "3/4");
    assert_eq!(r["body"]["vertices"], json!([["1/4", "1/4"], ["3/4", "1/4"], ["3/4", "3/4"], ["1/4", "3/4"]]));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polygon").count(), 2);
}

#[test]
fn csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "k.json", &json!({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}));
    let o = run(&["floating-body", "--body", &body, "--eps", "1/4", "--dirs", "axis", "--format", "csv"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("delta,3/4"));
}

#[test]
fn tverberg_net_selection_on_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = json!({"members": [
        {"vertices": [[0, 0]]}, {"vertices": [[4, 0]]}, {"vertices": [[0, 4]]}, {"vertices": [[1, 1]]}
    ]});
    let fam = write(dir.path(), "pts.json", &pts);
    let o = run(&["tverberg", "--family", &fam, "--parts", "2", "--measure", "nonempty"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["verified"], true);
    assert_eq!(r["witness"], json!(["1", "1"]));

    let corners = json!({"members": [
        {"vertices": [[0, 0]]}, {"vertices": [[1, 0]]}, {"vertices": [[1, 1]]}, {"vertices": [[0, 1]]}
    ]});
    let fam = write(dir.path(), "corners.json", &corners);
    let o = run(&["net", "--family", &fam, "--eps-prime", "3/4", "--measure", "nonempty"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert_eq!(r["net"].as_array().unwrap().len(), 1);
    assert_eq!(r["validated"], true);

    let o = run(&["selection", "--family", &fam, "--parts", "2", "--measure", "nonempty"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout_json(&o)["rho_achieved"].is_string());
}

#[test]
fn colorful_helly_command() {
    let dir = tempfile::tempdir().unwrap();
    let sq = json!({"members": [{"vertices": [[0, 0], [2, 0], [2, 2], [0, 2]]}, {"vertices": [[1, 0], [3, 0], [3, 2], [1, 2]]}]});
    let doc = json!({"schema": "quanthelly.classes/1", "classes": [sq, sq, sq]});
    let path = write(dir.path(), "classes.json", &doc);
    let o = run(&["colorful-helly", "--classes", &path, "--measure", "nonempty"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout_json(&o);
    assert!(r["class"].as_u64().unwrap() < 3);

    let far = json!({"members": [{"vertices": [[10, 10], [11, 10], [11, 11]]}]});
    let doc = json!({"classes": [sq, sq, far]});
    let path = write(dir.path(), "bad.json", &doc);
    let o = run(&["colorful-helly", "--classes", &path, "--measure", "nonempty"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", &json!({
        "schema": "quanthelly.experiment/1",
        "seed": 5,
        "trials": [
            {"name": "fb", "op": "floating-body-sweep", "eps": ["1/4", "1/16"], "dirs": "farey:2", "svg": true},
            {"name": "lattice", "op": "helly-check", "repeat": 3, "h": 4, "measure": "integer",
             "generator": {"kind": "random-polygons", "n": 5, "size": 4}}
        ]
    }));
    let out = dir.path().join("out");
    let o = run(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout_json(&o);
    assert_eq!(report["records"].as_array().unwrap().len(), 4);
    for f in ["report.json", "records.csv", "aggregates.csv", "fb-0.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let agg = fs::read_to_string(out.join("aggregates.csv")).unwrap();
    assert!(agg.starts_with("name,key,stat,value"));
}

#[test]
fn empty_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.json", &json!({"schema": "quanthelly.experiment/1", "trials": []}));
    let o = run(&["experiment", "--config", &cfg, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "name,key,stat,value\n");
}

#[test]
fn bad_input_exits_1() {
    let o = run(&["helly-check", "--family", "/nonexistent.json", "--h", "3"]);
    assert_eq!(o.status.code(), Some(1));
}
