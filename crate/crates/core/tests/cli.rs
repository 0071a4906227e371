use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tate-green")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn green_csv() {
    let out = run(&["green", "--p", "3", "--m", "1", "--k", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "row,col,value\n0:1,0:1,-9/2\n0:1,0:2,0/1\n0:2,0:1,0/1\n0:2,0:2,-9/2\n");
}

#[test]
fn cmatrix_json() {
    let out = run(&["cmatrix", "--p", "2", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["entries"], serde_json::json!([["-4/3", "0/1"], ["0/1", "-4/3"]]));
    assert_eq!(v["order"], serde_json::json!(["0", "1"]));
}

#[test]
fn verify_passes() {
    let out = run(&["verify", "--p", "2", "--m", "2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["summary"]["fail"], 0);
    assert!(v["checks"].as_array().unwrap().len() > 20);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["green", "--p", "4"][..],
        &["green", "--p", "2", "--k", "0"],
        &["bvalue", "--p", "2", "--i", "0", "--j", "0", "--l", "1", "--tol", "0"],
        &["bvalue", "--p", "2", "--i", "3", "--j", "0", "--l", "1"],
        &["green", "--normalize", "anchored"],
        &["green", "--normalize", "anchored", "--anchor", "9,9"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bvalue_and_anchor() {
    let out = run(&["bvalue", "--p", "2", "--m", "1", "--i", "0", "--j", "0", "--l", "0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v, serde_json::json!({ "center": "0/1", "radius": "0/1" }));

    let out = run(&["green", "--p", "2", "--m", "2", "--k", "2", "--normalize", "anchored", "--anchor", "0,0"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["entries"][0][0], "0/1");
    assert_eq!(v["normalization"], "anchored(0,0)");
}

#[test]
fn output_is_deterministic_and_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("op.json");
    let args = ["operator", "--p", "3", "--m", "2", "--k", "2", "--out", path.to_str().unwrap()];
    assert_eq!(run(&args).status.code(), Some(0));
    let first = std::fs::read_to_string(&path).unwrap();
    assert_eq!(run(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
    assert_eq!(stdout(&run(&args[..7])), first);
}

#[test]
fn spectrum_reports_kernel() {
    let out = run(&["spectrum", "--p", "2", "--f", "2", "--m", "2", "--k", "2", "--threads", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kernel_dim"], 1);
    assert_eq!(v["params"]["q"], 4);
}
