//! End-to-end behavior of the binary: file formats, exit codes, report
//! envelopes and agreement with the library.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chaos_lab::counting::rotation_bound_check;
use chaos_lab::dynamics::{Cyl, FiberPoint, OrbitState};
use chaos_lab::rational::Rational;
use chaos_lab::schedule::Schedule;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaos-lab"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn tmp(name: &str) -> PathBuf {
    let dir = tempfile::tempdir().expect("tempdir").keep();
    dir.join(name)
}

fn build_schedule(levels: u32, path: &Path) {
    run_ok(&[
        "schedule-build",
        "--levels",
        &levels.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
}

#[test]
fn single_level_schedule_matches_pinned_shape() {
    let path = tmp("s1.json");
    build_schedule(1, &path);
    let text = std::fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["truncated"], serde_json::json!(false));
    let level = &value["levels"][0];
    assert_eq!(level["l"], serde_json::json!(0));
    assert_eq!(level["r"], serde_json::json!("1/2"));
    assert_eq!(level["n"], serde_json::json!("1"));
    assert_eq!(level["eps"], serde_json::json!("1"));
    assert_eq!(level["m"], serde_json::json!(["1", "2", "5", "6"]));
    // the file loads back through the library
    Schedule::from_json(&text).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    let out = bin()
        .args(["schedule-build", "--levels", "0", "--out", "/tmp/never.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capped_schedule_certificates_refused_with_3() {
    let path = tmp("capped.json");
    run_ok(&[
        "schedule-build",
        "--levels",
        "3",
        "--cap",
        "15",
        "--out",
        path.to_str().unwrap(),
    ]);
    let out = bin()
        .args([
            "certify",
            "--schedule",
            path.to_str().unwrap(),
            "--mode",
            "factor-dc1",
            "--out",
            "/tmp/never.json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn horizon_overrun_exits_4() {
    let path = tmp("s1.json");
    build_schedule(1, &path);
    let out = bin()
        .args([
            "simulate",
            "--schedule",
            path.to_str().unwrap(),
            "--point",
            r#"{"k":"1","z":"1/3"}"#,
            "--steps",
            "100",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tampered_schedule_rejected_with_3() {
    let path = tmp("bad.json");
    build_schedule(2, &path);
    let text = std::fs::read_to_string(&path).unwrap();
    let bad = text.replace("\"n\":\"1\"", "\"n\":\"2\"");
    assert_ne!(bad, text);
    std::fs::write(&path, bad).unwrap();
    let out = bin()
        .args([
            "simulate",
            "--schedule",
            path.to_str().unwrap(),
            "--point",
            r#"{"k":"1","z":"1/3"}"#,
            "--steps",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn limit_point_trace_is_constant() {
    let schedule = tmp("s2.json");
    build_schedule(2, &schedule);
    let out = run_ok(&[
        "simulate",
        "--schedule",
        schedule.to_str().unwrap(),
        "--point",
        r#"{"k":"limit","phi":"1/3","z":"2/5"}"#,
        "--steps",
        "100",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 101);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], "limit");
        assert_eq!(fields[2], "0.333333333333");
        assert_eq!(fields[3], "0.400000000000");
    }
}

#[test]
fn endpoint_pair_distance_column_is_one() {
    let schedule = tmp("s3.json");
    build_schedule(3, &schedule);
    let out = run_ok(&[
        "simulate",
        "--schedule",
        schedule.to_str().unwrap(),
        "--point",
        r#"{"k":"1","z":"1"}"#,
        "--point2",
        r#"{"k":"1","z":"0"}"#,
        "--steps",
        "20",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    for row in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(*fields.last().unwrap(), "1.000000000000");
    }
}

#[test]
fn pair_trace_matches_library_stepping() {
    let schedule_path = tmp("s4.json");
    build_schedule(4, &schedule_path);
    let out = run_ok(&[
        "simulate",
        "--schedule",
        schedule_path.to_str().unwrap(),
        "--point",
        r#"{"k":"1","z":"2/7"}"#,
        "--point2",
        r#"{"k":"2","z":"5/9"}"#,
        "--steps",
        "50",
        "--format",
        "json",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = report["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 51);

    let schedule = Schedule::from_json(&std::fs::read_to_string(&schedule_path).unwrap()).unwrap();
    let mut u = FiberPoint::new(Cyl::finite(1), Rational::frac(2, 7)).unwrap();
    let mut v = FiberPoint::new(Cyl::finite(2), Rational::frac(5, 9)).unwrap();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            u = u.step(&schedule).unwrap();
            v = v.step(&schedule).unwrap();
        }
        assert_eq!(row["i"].as_str().unwrap(), i.to_string());
        assert_eq!(row["z"].as_str().unwrap(), u.height.to_string());
        assert_eq!(row["z2"].as_str().unwrap(), v.height.to_string());
        assert_eq!(row["distance"].as_str().unwrap(), u.dist(&v).to_string());
    }
}

#[test]
fn rotation_bound_single_sample_matches_library() {
    let path = tmp("rb1.json");
    run_ok(&[
        "rotation-bound",
        "--samples",
        "1",
        "--seed",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["schema_version"], serde_json::json!(1));
    let r = &report["result"]["reports"][0];
    let parse = |key: &str| -> Rational { r[key].as_str().unwrap().parse().unwrap() };
    let p: num_bigint::BigInt = r["p"].as_str().unwrap().parse().unwrap();
    let direct = rotation_bound_check(
        &chaos_lab::rational::Angle::new(parse("theta_u")),
        &chaos_lab::rational::Angle::new(parse("theta_v")),
        &parse("r_u"),
        &parse("r_v"),
        &parse("delta"),
        &p,
    )
    .unwrap();
    assert_eq!(direct.count.to_string(), r["count"].as_str().unwrap());
    assert_eq!(direct.fraction, parse("fraction"));
    assert_eq!(r["holds"], serde_json::json!(true));
}

#[test]
fn rotation_bound_thousand_samples_zero_violations() {
    let path = tmp("rb1000.json");
    run_ok(&[
        "rotation-bound",
        "--samples",
        "1000",
        "--seed",
        "42",
        "--out",
        path.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["result"]["violations"], serde_json::json!(0));
}

#[test]
fn classify_report_envelope_is_complete() {
    let schedule = tmp("s6.json");
    build_schedule(6, &schedule);
    let out_path = tmp("verdict.json");
    run_ok(&[
        "classify",
        "--schedule",
        schedule.to_str().unwrap(),
        "--point",
        r#"{"k":"1","phi":"1/7","z":"9/10"}"#,
        "--point2",
        r#"{"k":"1","phi":"2/7","z":"1/10"}"#,
        "--delta",
        "1/10",
        "--delta",
        "1/4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["schema_version"], serde_json::json!(1));
    assert!(report["schedule_sha256"].as_str().unwrap().len() == 64);
    assert_eq!(report["config"]["deltas"][0], serde_json::json!("1/10"));
    let case = &report["result"]["case"];
    assert_eq!(case["case"], serde_json::json!("height_split"));
    assert!(report["result"]["summaries"].as_array().unwrap().len() == 2);
}

#[test]
fn certify_factor_bundle_reports_zero_counts_for_endpoints() {
    let schedule = tmp("s6.json");
    build_schedule(6, &schedule);
    let out_path = tmp("factor.json");
    run_ok(&[
        "certify",
        "--schedule",
        schedule.to_str().unwrap(),
        "--mode",
        "factor-dc1",
        "--samples",
        "5",
        "--seed",
        "3",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(
        report["result"]["endpoint"]["all_counts_zero"],
        serde_json::json!(true)
    );
    let pairs = report["result"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 5);
    for p in pairs {
        assert!(!p["q_levels"].as_array().unwrap().is_empty());
    }
}
