use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn mwaring(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwaring")).args(args).output().expect("run mwaring")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

const J4_F5: &str = r#"{"field":"5","rows":[[0,1,0,0],[0,0,1,0],[0,0,0,1],[0,0,0,0]]}"#;

#[test]
fn zero_matrix_splits_into_zeros() {
    let out = mwaring(&["decompose", r#"{"field":"7","rows":[[0,0,0],[0,0,0],[0,0,0]]}"#, "--k", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["method"], "block-assembly");
    assert_eq!(v["A"], serde_json::json!([[0, 0, 0], [0, 0, 0], [0, 0, 0]]));
    assert_eq!(v["B"], v["A"]);
    assert_eq!(v["verified"], true);
}

#[test]
fn large_nilpotent_blocks_use_the_nilpotent_split() {
    for field in ["5", "2"] {
        let doc = J4_F5.replace(r#""5""#, &format!("\"{field}\""));
        let out = mwaring(&["decompose", &doc, "--k", "2"]);
        assert_eq!(out.status.code(), Some(0), "field {field}");
        assert_eq!(json(&out)["method"], "nilpotent-nilpotent");
    }
}

#[test]
fn certificate_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("z.json");
    std::fs::write(&matrix, r#"{"field":"3^2","rows":[[[1,1],[0,0],[2,0]],[[0,1],[1,0],[0,0]],[[2,2],[1,1],[0,1]]]}"#).unwrap();
    let matrix = matrix.to_str().unwrap();
    let out = mwaring(&["decompose", matrix, "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let cert = dir.path().join("cert.json");
    std::fs::write(&cert, &out.stdout).unwrap();
    let out = mwaring(&["verify", matrix, cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), serde_json::json!({"verified": true}));
}

#[test]
fn forged_certificate_is_rejected() {
    let out = mwaring(&["decompose", J4_F5, "--k", "2", "--json-indent", "0"]);
    let mut cert = json(&out);
    let entry = &mut cert["A"][0][0];
    *entry = Value::from((entry.as_u64().unwrap() + 1) % 5);
    let out = mwaring(&["verify", J4_F5, &cert.to_string()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out), serde_json::json!({"verified": false}));
}

#[test]
fn matrix_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mwaring"))
        .args(["decompose", "-", "--k", "2", "--field", "7"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(br#"{"rows":[[3,1],[0,3]]}"#).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["field"], "7^1");
}

#[test]
fn undecomposable_matrix_exits_with_reason() {
    // fourth powers in F_5 are 0 and 1, so 3 is not a sum of two
    let out = mwaring(&["decompose", r#"{"field":"5","rows":[[3]]}"#, "--k", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"], "not-decomposed");
    assert_eq!(v["block"], 0);
    assert!(v["reason"].as_str().unwrap().contains("no solution"));
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(mwaring(&["decompose", r#"{"field":"6","rows":[[1]]}"#, "--k", "2"]).status.code(), Some(1));
    assert_eq!(mwaring(&["decompose", r#"{"field":"7","rows":[[1,2]]}"#, "--k", "2"]).status.code(), Some(1));
    assert_eq!(mwaring(&["decompose", "/nonexistent/z.json", "--k", "2"]).status.code(), Some(1));
    assert_eq!(mwaring(&["decompose", J4_F5, "--k", "0"]).status.code(), Some(1));
    assert_eq!(mwaring(&["census", "--field", "7"]).status.code(), Some(1));
}

#[test]
fn census_reports() {
    let v = json(&mwaring(&["census", "--field", "7", "--k", "2", "--n", "2", "--lambda", "1"]));
    assert_eq!(v["N"], 8);
    assert_eq!(v["weil_holds"], true);

    let v = json(&mwaring(&["census", "--field", "11", "--k", "1", "--n", "2", "--lambda", "4"]));
    assert_eq!(v["N"], 11);

    let single = mwaring(&["census", "--field", "5", "--k", "4", "--n", "2", "--lambda", "2"]);
    let v = json(&single);
    // 2 = 1 + 1 only, from 4 * 4 pairs of fourth roots of unity
    assert_eq!(v["N"], 16);
    assert_eq!(v["special_lower"], 0);
    let split = mwaring(&["census", "--field", "5", "--k", "4", "--n", "2", "--lambda", "2", "--jobs", "3"]);
    assert_eq!(single.stdout, split.stdout);
}

#[test]
fn constants_report() {
    let v = json(&mwaring(&["constants", "--k", "2", "--n", "1"]));
    assert_eq!(v["C_small"], 16);
    assert_eq!(v["C_kn"], "undefined");
}

#[test]
fn output_is_byte_stable() {
    let args = ["decompose", r#"{"field":"13","rows":[[0,1,0],[0,0,1],[0,0,0]]}"#, "--k", "2", "--seed", "5"];
    let first = mwaring(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, mwaring(&args).stdout);
    let compact = mwaring(&["decompose", J4_F5, "--k", "2", "--json-indent", "0"]);
    assert_eq!(compact.stdout.iter().filter(|&&b| b == b'\n').count(), 1);
    let text = String::from_utf8(compact.stdout).unwrap();
    let keys = ["\"field\"", "\"modulus\"", "\"n\"", "\"k\"", "\"method\"", "\"A\"", "\"B\"", "\"P\"", "\"trail\"", "\"verified\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}
