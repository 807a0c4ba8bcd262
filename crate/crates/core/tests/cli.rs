//! End-to-end checks of the command line.

use std::process::Command;

use bihamiltonian::cli::report::{records_from_csv, Report};
use bihamiltonian::cli::run_with;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bihamiltonian").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn report(args: &[&str]) -> Report {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    Report::from_json(&out).unwrap()
}

#[test]
fn json_reports_roundtrip() {
    let r = report(&["streamline", "--system", "euler-top", "--smax", "1"]);
    assert_eq!(r.schema_version, 1);
    assert_eq!(r.command, "streamline");
    assert!(r.records.len() > 50);
    assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
}

#[test]
fn csv_carries_the_same_records_as_json() {
    let args = [
        "riccati",
        "--system",
        "euler-top",
        "--smax",
        "1",
        "--mu0",
        "0",
        "--mu0",
        "2",
    ];
    let json = report(&args);
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let (code, csv, _) = run(&csv_args);
    assert_eq!(code, 0);
    let rows = records_from_csv(&csv).unwrap();
    assert_eq!(rows.len(), json.records.len());
    for (a, b) in rows.iter().zip(&json.records) {
        for (k, v) in b {
            match (v, &a[k]) {
                (Value::Number(x), Value::Number(y)) => {
                    assert_eq!(x.as_f64(), y.as_f64(), "{k}")
                }
                (x, y) => assert_eq!(x, y, "{k}"),
            }
        }
    }
}

#[test]
fn construct_on_circular_is_both_zero() {
    let r = report(&[
        "construct",
        "--system",
        "circular",
        "--seed",
        "1,0,0",
        "--smax",
        "6.2832",
    ]);
    assert_eq!(r.summary["case_tag"], "BothZero");
    assert!(r.summary["compat_residual_max"].as_f64().unwrap() < 1e-8);
}

#[test]
fn verify_on_euler_top_is_exact() {
    let r = report(&["verify", "--system", "euler-top", "--samples", "100"]);
    assert_eq!(r.records.len(), 100);
    for rec in &r.records {
        assert!(rec["hamilton1"].as_f64().unwrap() < 1e-12);
        assert!((rec["psi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    let bin = env!("CARGO_BIN_EXE_bihamiltonian");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(
        code(&["frame", "--system", "euler-top", "--point", "1,2,3"]),
        Some(0)
    );
    assert_eq!(
        code(&["frame", "--field", "1,0,0", "--point", "0,0,0"]),
        Some(2)
    );
    assert_eq!(
        code(&["frame", "--field", "1,0,", "--point", "0,0,0"]),
        Some(1)
    );
    assert_eq!(
        code(&["frame", "--system", "nope", "--point", "0,0,0"]),
        Some(1)
    );
    assert_eq!(code(&["no-such-command"]), Some(1));
}

#[test]
fn parse_errors_print_the_grammar() {
    let (code, _, err) = run(&["frame", "--field", "x +* y, 0, 0", "--point", "0,0,0"]);
    assert_eq!(code, 1);
    assert!(err.contains("sin"), "{err}");
}

#[test]
fn degenerate_runs_still_report() {
    let (code, out, _) = run(&["streamline", "--field", "1, 0, 0", "--seed", "0,0,0"]);
    assert_eq!(code, 2);
    let r = Report::from_json(&out).unwrap();
    assert_eq!(r.summary["status"], "degenerate");
    assert_eq!(r.summary["degeneracy"]["kind"], "VanishingNormal");
}

#[test]
fn thresholds_are_flags() {
    // a huge normal floor makes every point degenerate
    let (code, _, _) = run(&[
        "frame",
        "--system",
        "euler-top",
        "--point",
        "1,2,3",
        "--normal-floor",
        "1e6",
    ]);
    assert_eq!(code, 2);
    let r = report(&[
        "frame",
        "--system",
        "euler-top",
        "--point",
        "1,2,3",
        "--normal-floor",
        "1e-3",
    ]);
    assert_eq!(r.input["normal_floor"].as_f64(), Some(1e-3));
}

#[test]
fn catalog_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("systems.toml");
    std::fs::write(
        &path,
        r#"
[[system]]
name = "saddle"
field = "x, -y, 0"
seed = [1.0, 1.0, 0.5]
notes = "Hyperbolic point."
"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let listing = report(&["catalog", "--config", p]);
    assert_eq!(listing.records.len(), 1);
    assert_eq!(listing.records[0]["name"], "saddle");
    let (code, _, _) = run(&[
        "helicity", "--system", "saddle", "--config", p, "--point", "1,1,0.5",
    ]);
    assert_ne!(code, 1);
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frame.json");
    let (code, out, _) = run(&[
        "frame",
        "--system",
        "euler-top",
        "--point",
        "1,2,3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let r = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r.records.len(), 1);
}

#[test]
fn helicity_grid_uses_the_sample_count() {
    let r = report(&[
        "helicity",
        "--system",
        "euler-top",
        "--box",
        "0.5,1,0.5,1,0.5,1",
        "--samples",
        "17",
    ]);
    assert_eq!(r.records.len(), 17);
}
