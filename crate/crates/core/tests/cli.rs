//! Drives the installed binary end to end: exit codes, stdout bytes,
//! stdin documents, --out files.

use std::io::Write;
use std::process::{Command, Stdio};

fn drinlev(args: &[&str], stdin: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_drinlev"));
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.stdin(if stdin.is_some() { Stdio::piped() } else { Stdio::null() });
    let mut child = cmd.spawn().expect("spawn");
    if let Some(text) = stdin {
        child.stdin.as_mut().unwrap().write_all(text.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().expect("wait");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn hecke_worked_example() {
    let (code, stdout, _) = drinlev(&["hecke", "--q", "2", "--p", "t", "--d", "2", "--k", "1"], None);
    assert_eq!(code, 0);
    assert_eq!(stdout, "{\"G_k\":1,\"deg_m\":3,\"deg_r\":3}\n");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let a = drinlev(&["dickson", "verify", "--q", "2", "--d", "2", "--Dmax", "8"], None);
    let b = drinlev(&["dickson", "verify", "--q", "2", "--d", "2", "--Dmax", "8"], None);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    assert!(!a.1.is_empty());
}

#[test]
fn level_check_over_stdin_and_exit_codes() {
    // valid full-level map on the rank-2 module over F_2 at (t):
    // images are an F_2-basis of the 4-point torsion
    let valid = r#"{"q":2,"phi":[1,0,1],"prime":"t","shape":[1,1],"ext_deg":2,"images":[[1,2]]}"#;
    let (code, stdout, _) = drinlev(&["drinfeld", "level", "--in", "/dev/stdin"], Some(valid));
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    if code != 0 {
        panic!("unexpected failure: {stdout}");
    }
    assert_eq!(v["valid"], true);
    assert_eq!(v["division_route"], true);

    // the zero map fails the divisor condition: exit 1, "error" set
    let invalid = r#"{"q":2,"phi":[1,0,1],"prime":"t","shape":[1,1],"ext_deg":2,"images":[[0,0]]}"#;
    let (code, stdout, _) = drinlev(&["drinfeld", "level", "--in", "/dev/stdin"], Some(invalid));
    assert_eq!(code, 1, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["error"].is_string());
}

#[test]
fn bad_input_exits_two() {
    let (code, stdout, _) = drinlev(&["hecke", "--q", "2", "--p", "t^", "--d", "2", "--k", "1"], None);
    assert_eq!(code, 2);
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["error"].is_string());

    // unknown field in the document
    let doc = r#"{"q":2,"p":"t","construction":"gamma0","d":2,"n":1,"bogus":true}"#;
    let (code, _, _) = drinlev(&["jchain", "--in", "/dev/stdin"], Some(doc));
    assert_eq!(code, 2);

    // argv parse errors are exit 2 as well
    let (code, _, _) = drinlev(&["hecke", "--q", "2"], None);
    assert_eq!(code, 2);
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (code, stdout, _) = drinlev(
        &["formal", "lubin-tate", "--q", "2", "--n", "2", "--out", path.to_str().unwrap()],
        None,
    );
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["ram_index"], 2);
}

#[test]
fn formal_level_document_round() {
    // pi = v^3 on the height-2 module with t_1 = 0: X(X - v) divides
    // f_pi = v^3 X + X^4, so the one-generator map e -> v is valid
    let doc = r#"{"q":2,"nvars":1,"trunc":8,"pi":{"3":1},"t":[{}],"shape":[1],"images":[{"1":1}]}"#;
    let (code, stdout, _) = drinlev(&["formal", "level", "--in", "/dev/stdin"], Some(doc));
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["valid"], true);
}

#[test]
fn km_accepts_translation_rejects_swap() {
    let ok = r#"{"q":2,"trunc":10,"gens":[[[1,0],[1,1]]]}"#;
    let (code, stdout, _) = drinlev(&["km", "--in", "/dev/stdin"], Some(ok));
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["free_basis_ok"], true);
    assert_eq!(v["params_ok"], true);

    let swap = r#"{"q":2,"trunc":10,"gens":[[[0,1],[1,0]]]}"#;
    let (code, stdout, _) = drinlev(&["km", "--in", "/dev/stdin"], Some(swap));
    assert_eq!(code, 1, "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["error"].as_str().unwrap().contains("x1"));
}

#[test]
fn seed_variable_is_ignored() {
    let mut with_seed = Command::new(env!("CARGO_BIN_EXE_drinlev"));
    with_seed.args(["dickson", "generators", "--q", "3", "--d", "1"]);
    with_seed.env("DRINLEV_SEED", "12345");
    let a = with_seed.output().unwrap();
    let b = drinlev(&["dickson", "generators", "--q", "3", "--d", "1"], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(String::from_utf8(a.stdout).unwrap(), b.1);
}
