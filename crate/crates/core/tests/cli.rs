use std::path::Path;
use std::process::{Command, Output};

use qss_core::experiment::ExperimentReport;

const HONEST: &str = "
num_runs = 20
seed_base = 5
[base]
m = 2
n = 3
block_size = 128
";

fn qss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSS_REPORT_PATH")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ok.toml"), HONEST).unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[base]\nm = 1\nn = 2\nblock_size = 64\n",
    )
    .unwrap();

    let ok = qss(&["validate", "ok.toml"], dir.path());
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("1 configuration(s) x 20 run(s)"));

    let bad = qss(&["validate", "bad.toml"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("m >= 2"));
}

#[test]
fn run_writes_identical_json_reports() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.toml"), HONEST).unwrap();
    for name in ["a.json", "b.json"] {
        let out = qss(
            &[
                "run",
                "spec.toml",
                "--format",
                "json",
                "--out",
                name,
                "--jobs",
                "2",
            ],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    let report = ExperimentReport::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(report.configurations[0].accepted, 20);
}

#[test]
fn flags_and_env_override_spec() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.toml"),
        format!("report_path = \"spec.json\"\n{HONEST}"),
    )
    .unwrap();

    let out = qss(
        &[
            "run",
            "spec.toml",
            "--format",
            "json",
            "--runs",
            "3",
            "--seed",
            "99",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let report = ExperimentReport::from_json(
        &std::fs::read_to_string(dir.path().join("spec.json")).unwrap(),
    )
    .unwrap();
    assert_eq!((report.num_runs, report.seed_base), (3, 99));

    let out = Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(["run", "spec.toml", "--runs", "2"])
        .current_dir(dir.path())
        .env("QSS_REPORT_PATH", "env.txt")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_to_string(dir.path().join("env.txt"))
        .unwrap()
        .contains("accept rate"));
}

#[test]
fn trace_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.toml"), HONEST).unwrap();
    let out = qss(
        &["trace", "spec.toml", "--run", "4", "--out", "run.jsonl"],
        dir.path(),
    );
    assert!(out.status.success());

    let replayed = qss(&["replay", "run.jsonl"], dir.path());
    assert!(replayed.status.success(), "{}", stdout(&replayed));
    assert!(stdout(&replayed).contains("bit-identically"));

    let path = dir.path().join("run.jsonl");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"value\":true", "\"value\":false", 1)).unwrap();
    let tampered = qss(&["replay", "run.jsonl"], dir.path());
    assert_eq!(tampered.status.code(), Some(1));
    assert!(stdout(&tampered).contains("diverges"));
}

#[test]
fn missing_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        qss(&["run", "nope.toml"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        qss(&["replay", "nope.jsonl"], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn shipped_experiments_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let out = qss(&["validate", path.to_str().unwrap()], &dir);
            assert!(
                out.status.success(),
                "{}: {}",
                path.display(),
                String::from_utf8_lossy(&out.stderr)
            );
            count += 1;
        }
    }
    assert!(count >= 4);
}
