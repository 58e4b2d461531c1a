//! End-to-end runs of the `holevo` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn holevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holevo"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_record(o: &Output) -> Value {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    serde_json::from_str(err.lines().last().unwrap()).unwrap()
}

#[test]
fn chi_csv_with_and_without_header() {
    let args = ["chi", "--set", "tau_max=1", "--set", "tau_points=5"];
    let with = holevo(&args);
    assert!(with.status.success());
    let text = stdout(&with);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# holevo "));
    assert_eq!(lines.next().unwrap(), "tau,chi");
    assert_eq!(lines.next().unwrap(), "0,0");
    assert_eq!(text.lines().count(), 7);

    let without = holevo(&[&args[..], &["--no-header"]].concat());
    let text = stdout(&without);
    assert!(text.starts_with("tau,chi\n0,0\n0.25,"));
    assert!(text.ends_with('\n'));
}

#[test]
fn schemas_per_mode() {
    let cases = [
        ("chi-vs-chi-infinity", "tau,chi,chi_infinity"),
        ("phi-scan", "tau,chi_pi/2,chi_pi/4,chi_pi/6,chi_0"),
        ("beta-scan", "tau,chi_10,chi_5,chi_2,chi_1"),
        ("short-time", "tau,chi"),
        ("max-condition", "phi,omega_solved,psi,chi_late_avg"),
        ("validate", "check_name,status,metric,tolerance"),
    ];
    for (mode, header) in cases {
        let o = holevo(&[mode, "--no-header", "--set", "tau_points=201"]);
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o).lines().next().unwrap(), header, "{mode}");
    }
}

#[test]
fn config_file_then_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"mode": "phi-scan", "phi_values": ["pi/2", 0], "tau_max": 2, "tau_points": 3}"#).unwrap();
    let out = dir.path().join("out.csv");
    let o = holevo(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "phi_values=pi/3",
        "--output",
        out.to_str().unwrap(),
        "--no-header",
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "tau,chi_pi/3");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn subcommand_overrides_config_mode() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"mode": "phi-scan", "tau_points": 3}"#).unwrap();
    let o = holevo(&["chi", "--config", config.to_str().unwrap(), "--no-header"]);
    assert_eq!(stdout(&o).lines().next().unwrap(), "tau,chi");
}

#[test]
fn config_errors_exit_two_with_record() {
    for args in [
        vec!["chi", "--set", "bogus=1"],
        vec!["chi", "--set", "phi=pi/x"],
        vec!["chi", "--set", "tau_points=1"],
        vec!["chi", "--set", "M=-1"],
        vec!["chi", "--format", "xml"],
        vec!["validate", "--format", "svg"],
    ] {
        let o = holevo(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let record = error_record(&o);
        assert_eq!(record["error"], "config");
        assert_eq!(record["exit_code"], 2);
    }
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, r#"{"g": 1, "g_tilde": 0.5}"#).unwrap();
    let o = holevo(&["chi", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let missing = holevo(&["chi", "--config", "/nonexistent/holevo.json"]);
    assert_eq!(error_record(&missing)["error"], "io");
}

#[test]
fn validate_passes() {
    let o = holevo(&["validate", "--no-header"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.split(',').nth(1) == Some("pass")));
}

#[test]
fn short_time_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("short.csv");
    let o = holevo(&["short-time", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("short.csv.fit.json")).unwrap()).unwrap();
    for key in ["lambda_closed_form", "lambda_fit", "rel_dev", "r2"] {
        assert!(side[key].is_number(), "{key}");
    }
    assert_eq!(side["points"], 50);
}

#[test]
fn json_and_svg_formats() {
    let o = holevo(&["chi", "--format", "json", "--set", "tau_points=3"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["columns"], serde_json::json!(["tau", "chi"]));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 3);
    assert_eq!(doc["meta"]["mode"], "chi");

    let o = holevo(&["phi-scan", "--format", "svg", "--set", "tau_points=50"]);
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("stroke-width=\"1.5\"").count(), 4);
}

/// Re-running the effective config recorded in the header reproduces the data.
#[test]
fn header_config_round_trip() {
    let first = holevo(&["beta-scan", "--set", "tau_points=101", "--set", "phi=pi/5"]);
    let text = stdout(&first);
    let header = text.lines().next().unwrap();
    let json = header.split_once("config=").unwrap().1;
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("effective.json");
    fs::write(&config, json).unwrap();
    let second = holevo(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(stdout(&second), text);
}

#[test]
fn output_to_unwritable_path_is_runtime_error() {
    let o = holevo(&["chi", "--set", "tau_points=3", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"], "io");
    assert!(!Path::new("/nonexistent/dir/out.csv").exists());
}
