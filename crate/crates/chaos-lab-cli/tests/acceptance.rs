//! Acceptance criterion: identical configuration and seed produce
//! byte-identical outputs for every command.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chaos-lab"))
}

fn tmp_dir() -> PathBuf {
    tempfile::tempdir().expect("tempdir").keep()
}

/// Runs the command twice with `--out` pointed at two files and asserts
/// the bytes agree. Returns the first output file's bytes.
fn run_twice(args: &[&str], dir: &std::path::Path, name: &str) -> Vec<u8> {
    let a = dir.join(format!("{name}.a"));
    let b = dir.join(format!("{name}.b"));
    for path in [&a, &b] {
        let status = bin()
            .args(args)
            .args(["--out", path.to_str().unwrap()])
            .status()
            .expect("binary runs");
        assert!(status.success(), "command {args:?} failed");
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "outputs of {args:?} must be byte-identical");
    bytes_a
}

#[test]
fn c9_cli_determinism() {
    let dir = tmp_dir();
    let schedule = dir.join("schedule.json");
    let schedule_capped = dir.join("capped.json");

    // schedule-build, uncapped and capped
    for (path, cap) in [(&schedule, "none"), (&schedule_capped, "600")] {
        let a = dir.join("build.a");
        for target in [path.clone(), a.clone()] {
            let status = bin()
                .args([
                    "schedule-build",
                    "--levels",
                    "6",
                    "--cap",
                    cap,
                    "--out",
                    target.to_str().unwrap(),
                ])
                .status()
                .unwrap();
            assert!(status.success());
        }
        assert_eq!(std::fs::read(path).unwrap(), std::fs::read(&a).unwrap());
    }
    let sched = schedule.to_str().unwrap();
    let capped = schedule_capped.to_str().unwrap();

    let rotation_baseline = run_twice(
        &["rotation-bound", "--samples", "200", "--seed", "42"],
        &dir,
        "rotation_json",
    );
    // the worker-pool cap must not change a single byte
    let capped_out = dir.join("rotation_threads.json");
    let status = bin()
        .env("CHAOS_LAB_THREADS", "2")
        .args([
            "rotation-bound",
            "--samples",
            "200",
            "--seed",
            "42",
            "--out",
            capped_out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read(&capped_out).unwrap(), rotation_baseline);
    run_twice(
        &[
            "rotation-bound",
            "--samples",
            "100",
            "--seed",
            "7",
            "--format",
            "csv",
        ],
        &dir,
        "rotation_csv",
    );
    run_twice(
        &[
            "simulate",
            "--schedule",
            sched,
            "--point",
            r#"{"k":"1","phi":"1/3","z":"2/5"}"#,
            "--point2",
            r#"{"k":"1","phi":"0","z":"4/5"}"#,
            "--steps",
            "500",
            "--stride",
            "10",
        ],
        &dir,
        "simulate_csv",
    );
    run_twice(
        &[
            "simulate",
            "--schedule",
            capped,
            "--point",
            r#"{"k":"2","z":"1/3"}"#,
            "--steps",
            "300",
            "--format",
            "json",
        ],
        &dir,
        "simulate_json",
    );
    run_twice(
        &[
            "classify",
            "--schedule",
            sched,
            "--point",
            r#"{"k":"1","phi":"1/7","z":"19/20"}"#,
            "--point2",
            r#"{"k":"1","phi":"2/7","z":"1/20"}"#,
            "--li-yorke-steps",
            "200",
        ],
        &dir,
        "classify",
    );
    run_twice(
        &[
            "certify",
            "--schedule",
            sched,
            "--mode",
            "factor-dc1",
            "--samples",
            "5",
            "--seed",
            "11",
        ],
        &dir,
        "certify_factor",
    );
    run_twice(
        &[
            "certify",
            "--schedule",
            sched,
            "--mode",
            "extension-nodc",
            "--samples",
            "3",
            "--seed",
            "11",
        ],
        &dir,
        "certify_extension",
    );

    println!(
        "ACCEPTANCE c9 PASS: every command produced byte-identical output \
         across repeated runs with identical seeds"
    );
}
