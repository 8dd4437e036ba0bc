use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_localgauss"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

#[test]
fn hnf_of_worked_example() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "a.txt", "1 0 0\n9/2 2 0\n4 2 1\n");
    let v = json(&run(&[
        "--prime",
        "2",
        "--format",
        "json",
        "hnf",
        f.to_str().unwrap(),
    ]));
    assert_eq!(
        v["hnf"],
        serde_json::json!([["1", "0", "0"], ["1/2", "2", "0"], ["0", "0", "1"]])
    );
    assert_eq!(v["measure_log"], 1);
}

#[test]
fn hnf_identity_and_permuted_diagonal() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.txt", "1 0\n0 1\n");
    let text = stdout(&run(&["--prime", "5", "hnf", id.to_str().unwrap()]));
    assert!(text.contains("1 0\n0 1\n"), "{text}");
    let perm = write(&dir, "perm.json", r#"[["0","4"],["1/2","0"]]"#);
    let v = json(&run(&[
        "--prime",
        "2",
        "--format",
        "json",
        "hnf",
        perm.to_str().unwrap(),
    ]));
    assert_eq!(v["hnf"], serde_json::json!([["4", "0"], ["0", "1/2"]]));
    assert_eq!(v["diag_exponents"], serde_json::json!([2, -1]));
}

#[test]
fn emitted_lattices_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "a.txt", "3 1 0\n1/3 9 2\n0 5 7\n");
    let first = stdout(&run(&[
        "--prime",
        "3",
        "--format",
        "json",
        "hnf",
        f.to_str().unwrap(),
    ]));
    let g = write(&dir, "b.json", &first);
    let second = stdout(&run(&["--format", "json", "hnf", g.to_str().unwrap()]));
    assert_eq!(first, second);
    let text = stdout(&run(&["--prime", "3", "hnf", f.to_str().unwrap()]));
    let h = write(&dir, "c.txt", &text);
    let third = stdout(&run(&[
        "--prime",
        "3",
        "--format",
        "json",
        "hnf",
        h.to_str().unwrap(),
    ]));
    assert_eq!(first, third);
}

#[test]
fn ci_on_four_dim_example() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "l.json",
        r#"{"p": 5, "hnf": [["1","0","0","0"],["1","1","0","0"],["1","0","5","0"],["1","1/5","1/5","25"]]}"#,
    );
    let v = json(&run(&[
        "--format",
        "json",
        "ci",
        f.to_str().unwrap(),
        "--given",
        "1",
    ]));
    assert_eq!(v["C"], serde_json::json!([[1, 0, 0], [0, 1, 0], [1, 1, 0]]));
    assert_eq!(v["bases"], serde_json::json!([[2, 3], [2, 4], [3, 4]]));
    assert_eq!(v["ground"], serde_json::json!([2, 3, 4]));
    assert!(v["statements"]
        .as_array()
        .unwrap()
        .contains(&"X2 ⊥ X4 | X1".into()));
    let v = json(&run(&[
        "--format",
        "json",
        "ci",
        f.to_str().unwrap(),
        "--given",
        "1",
        "--targets",
        "2,3,4",
    ]));
    assert_eq!(v["independent"], false);
}

#[test]
fn trop_on_d3_example() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "d3.txt", "1 0 0\n1 4 0\n1 2 4\n");
    let v = json(&run(&[
        "--prime",
        "2",
        "--format",
        "json",
        "trop",
        f.to_str().unwrap(),
    ]));
    assert_eq!(
        v["polynomial"]["coefficients"],
        serde_json::json!([0, 0, 0, 0, 2, 1, 1, 4])
    );
    assert_eq!(v["supermodular"], true);
    assert_eq!(v["report"]["mismatches"], serde_json::json!([]));
    let text = stdout(&run(&["--prime", "2", "trop", f.to_str().unwrap()]));
    assert!(text.starts_with(
        "P_L = max(0, v1, v2, v3, v1 + v2 - 2, v1 + v3 - 1, v2 + v3 - 1, v1 + v2 + v3 - 4)\n"
    ));
}

#[test]
fn building_commands() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.txt", "1 0\n0 1\n");
    let text = stdout(&run(&[
        "--prime",
        "2",
        "building",
        id.to_str().unwrap(),
        "neighbors",
    ]));
    assert_eq!(text, "[[1,0],[0,2]]\n[[1,0],[1,2]]\n[[2,0],[0,1]]\n");
    let other = write(&dir, "o.txt", "1 0\n0 2\n");
    let v = json(&run(&[
        "--prime",
        "2",
        "--format",
        "json",
        "building",
        id.to_str().unwrap(),
        "adjacent",
        other.to_str().unwrap(),
    ]));
    assert_eq!(v["adjacent"], true);
    let v = json(&run(&[
        "--prime",
        "2",
        "--format",
        "json",
        "building",
        id.to_str().unwrap(),
        "ball",
        "2",
    ]));
    assert_eq!(v["vertices"].as_array().unwrap().len(), 10);
    assert_eq!(v["edges"].as_array().unwrap().len(), 9);
    let dot = stdout(&run(&[
        "--prime",
        "2",
        "--format",
        "dot",
        "building",
        id.to_str().unwrap(),
        "ball",
        "1",
    ]));
    assert!(dot.starts_with("graph ball {\n  v0 [label=\"1 0\\n0 1\"];"));
    assert_eq!(dot.matches(" -- ").count(), 3);
}

#[test]
fn mle_from_dataset() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "data.txt", "3 0\n0 3\n1 1\n");
    let v = json(&run(&[
        "--prime",
        "3",
        "--format",
        "json",
        "mle",
        f.to_str().unwrap(),
    ]));
    assert_eq!(v["hnf"], serde_json::json!([["1", "0"], ["1", "3"]]));
    assert_eq!(v["log_likelihood"], 3);
}

#[test]
fn output_is_deterministic_across_threads() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "l.txt", "1 0\n1 3\n");
    let path = f.to_str().unwrap();
    let a = stdout(&run(&[
        "--prime",
        "3",
        "--seed",
        "7",
        "--threads",
        "1",
        "--format",
        "json",
        "sample",
        path,
        "-n",
        "5000",
    ]));
    let b = stdout(&run(&[
        "--prime",
        "3",
        "--seed",
        "7",
        "--threads",
        "2",
        "--format",
        "json",
        "sample",
        path,
        "-n",
        "5000",
    ]));
    assert_eq!(a, b);
    let c = stdout(&run(&[
        "--prime", "3", "--seed", "8", "--format", "json", "sample", path, "-n", "5000",
    ]));
    assert_ne!(a, c);
    let t1 = stdout(&run(&["--prime", "3", "--threads", "1", "trop", path]));
    let t2 = stdout(&run(&["--prime", "3", "--threads", "2", "trop", path]));
    assert_eq!(t1, t2);
}

#[test]
fn sample_respects_lattice() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "l.txt", "4 0\n0 1/2\n");
    let v = json(&run(&[
        "--prime",
        "2",
        "--precision",
        "6",
        "--format",
        "json",
        "sample",
        f.to_str().unwrap(),
        "-n",
        "50",
    ]));
    for s in v["samples"].as_array().unwrap() {
        let vals = s["valuations"].as_array().unwrap();
        let ok = |x: &Value, lo: i64| x.as_i64().map_or(x == "inf", |n| n >= lo);
        assert!(ok(&vals[0], 2) && ok(&vals[1], -1), "{s}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "1 0\n0 1/x\n");
    let out = run(&["--prime", "2", "hnf", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column 5"), "{err}");

    let singular = write(&dir, "s.txt", "1 2\n2 4\n");
    let out = run(&["--prime", "3", "sample", singular.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("not full rank") && err.contains("input: [[1],[2]]"),
        "{err}"
    );

    let id = write(&dir, "id.txt", "1 0\n0 1\n");
    let out = run(&["--prime", "2", "ci", id.to_str().unwrap(), "--given", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "--prime",
        "2",
        "--format",
        "json",
        "ci",
        id.to_str().unwrap(),
        "--given",
        "1,2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["--prime", "6", "hnf", id.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["hnf", id.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "--prime",
        "2",
        "hnf",
        dir.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&[
        "--prime",
        "2",
        "--precision",
        "0",
        "sample",
        id.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
