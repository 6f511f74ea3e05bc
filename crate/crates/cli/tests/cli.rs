use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parity-gauss"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap().trim().to_string()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let v: Value = serde_json::from_str(&stdout(&all)).unwrap();
    assert_eq!(v["schema"], "1");
    v
}

#[test]
fn dims_examples() {
    assert_eq!(
        stdout(&[
            "dims",
            "--n",
            "2",
            "--k",
            "2",
            "--ambient",
            "line",
            "--quotient",
            "o"
        ]),
        "11"
    );
    assert_eq!(
        stdout(&[
            "dims",
            "--n",
            "3",
            "--k",
            "1",
            "--ambient",
            "loop",
            "--quotient",
            "o"
        ]),
        "3"
    );
    assert_eq!(stdout(&["dims", "--n", "2", "--quotient", "gpv"]), "3");
    let v = json(&["dims", "--n", "2", "--k", "1"]);
    assert_eq!(v["dimension"], "5");
    assert_eq!(v["quotient"]["kind"], "o");
}

#[test]
fn eval_builtin_on_arguments_and_stdin() {
    assert_eq!(
        stdout(&[
            "eval",
            "--formula",
            "F_r",
            "--parity",
            "gaussian",
            "O1+ U1+"
        ]),
        "0"
    );
    // Blank lines and comments on stdin are skipped.
    let mut child = bin()
        .args(["eval", "--formula", "F_r"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"O1+ U1+\n# comment\n\nO1+ O2+ U1+ U2+\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 2);
}

#[test]
fn basis_round_trips_through_eval() {
    let dir = std::env::temp_dir().join(format!("parity-gauss-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("basis.json");
    let text = stdout(&["--json", "basis", "--n", "2", "--k", "1"]);
    std::fs::write(&path, &text).unwrap();
    let basis: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(basis["dimension"], "5");
    assert_eq!(basis["formulas"].as_array().unwrap().len(), 5);
    let p = path.to_str().unwrap();
    for i in 0..5 {
        let idx = i.to_string();
        let v = json(&[
            "eval",
            "--formula",
            p,
            "--index",
            &idx,
            "O1+ O2- U1+ U2-",
            "O1+ U1+",
        ]);
        for row in v["values"].as_array().unwrap() {
            row["value"].as_str().unwrap().parse::<i64>().unwrap();
        }
    }
    let out = run(&["eval", "--formula", p, "--index", "9", "O1+ U1+"]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_deterministic() {
    let args = ["--json", "basis", "--n", "2", "--k", "2"];
    assert_eq!(stdout(&args), stdout(&args));
    let walk = [
        "--json",
        "walk",
        "O1+ O2- U1+ U2-",
        "--steps",
        "8",
        "--seed",
        "5",
    ];
    assert_eq!(stdout(&walk), stdout(&walk));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["--json", "basis", "--n", "2", "--k", "2"];
    let one = bin()
        .args(args)
        .env("PARITY_GAUSS_THREADS", "1")
        .output()
        .unwrap();
    let four = bin()
        .args(args)
        .env("PARITY_GAUSS_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = bin()
        .args(args)
        .env("PARITY_GAUSS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn diagram_commands() {
    let v = json(&["parse", "O2+ U2+"]);
    assert_eq!(v["canonical_key"], "O1+ U1+");
    assert_eq!(stdout(&["index", "O1+ O2- U1+ U2-"]), "1 -1");
    assert_eq!(stdout(&["parity", "O1+ O2- U1+ U2-"]).split(' ').count(), 2);
    assert_eq!(
        stdout(&["f-map", "--fixpoint", "O1+ O2- U1+ U2- O3+ U3+"]),
        "O1+ U1+"
    );
    let walk = json(&["walk", "", "--steps", "4", "--seed", "2", "--zero-index"]);
    assert_eq!(walk["trajectory"].as_array().unwrap().len(), 5);
}

#[test]
fn generator_and_builtins() {
    let v = json(&["solve-generator", "2", "0"]);
    assert_eq!(v["solution"]["c0"], "2");
    let v = json(&["builtin", "F_rr"]);
    assert_eq!(v["quotient"]["n"], 2);
    assert!(!v["terms"].as_array().unwrap().is_empty());
    assert_eq!(run(&["builtin", "F_zz"]).status.code(), Some(1));
}

#[test]
fn probes_and_reports() {
    let v = json(&["zero-index-report", "--bound", "2"]);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
    let k = stdout(&[
        "probe-kauffman",
        "--formula",
        "F_r",
        "--singular",
        "0",
        "O1+ U1+",
    ]);
    k.parse::<i64>().unwrap();
    let t = stdout(&[
        "probe-virtualization",
        "--formula",
        "F_n",
        "--flips",
        "0",
        "O1+ U1+",
    ]);
    assert_eq!(t, "true");
    let d = stdout(&[
        "decompose-check",
        "--formula",
        "v21",
        "O1+ O2- U1+ U2-",
        "O1+ O2+ U1+ U2+",
    ]);
    assert!(d.lines().all(|l| l == "true"), "{d}");
}

#[test]
fn errors_and_exit_codes() {
    let out = run(&["parse", "O1+ U1+ O2+"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["schema"], "1");
    assert!(err["error"]["kind"].is_string());

    let out = run(&["parse", "O1+ X"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
    assert_eq!(err["error"]["position"], 1);

    assert_eq!(run(&["dims"]).status.code(), Some(2));
    assert_eq!(
        run(&["eval", "--formula", "F_r", "--parity", "odd", "O1+ U1+"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["index", "--ambient", "loop", "O1+ U1+"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(&["eval", "--formula", "/nonexistent/f.json", "O1+ U1+"])
            .status
            .code(),
        Some(1)
    );
}
