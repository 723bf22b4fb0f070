//! Golden-file tests: every subcommand on the shipped fixtures, run twice in CI mode.
//!
//! Set `OLP_BLESS=1` to rewrite the golden files.

mod cases;

use std::path::Path;
use std::process::Command;

use cases::*;

fn compare(path: &Path, actual: &[u8]) {
    if std::env::var("OLP_BLESS").is_ok_and(|v| v == "1") {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, actual).unwrap();
        return;
    }
    let expected = std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(
        expected == actual,
        "{} differs:\n{}",
        path.display(),
        String::from_utf8_lossy(actual)
    );
}

#[test]
fn every_subcommand_matches_its_golden_file_on_two_runs() {
    for (name, args) in CASES {
        let first = olp(args);
        let second = olp(args);
        assert_eq!(first.status.code(), Some(expected_code(name)), "{name}: {}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout, "{name}: runs differ");
        compare(&golden(name, extension(args)), &first.stdout);
    }
}

#[test]
fn reduce_writes_a_reparsable_zero_sum_game() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("reduced{run}.json"));
        let o = olp(&["reduce", "--game", "tests/fixtures/table_general.json", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        compare(&golden("reduce_table_general", "json"), &o.stdout);
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    compare(&golden("reduced_game", "json"), &files[0]);

    let reduced = dir.path().join("reduced0.json");
    let check = olp(&["check", "--game", reduced.to_str().unwrap(), "--property", "axioms", "--seed", "1"]);
    assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stdout));
    let report: serde_json::Value = serde_json::from_slice(&check.stdout).unwrap();
    assert_eq!(report["report"]["verdict"], "holds");
    let eq = olp(&["equilibrium", "--game", reduced.to_str().unwrap()]);
    assert_eq!(eq.status.code(), Some(0));
}

#[test]
fn report_goes_to_the_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = olp(&["maximin", "--game", "tests/fixtures/pennies.json", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    compare(&golden("maximin_pennies", "json"), &std::fs::read(&out).unwrap());
}

#[test]
fn malformed_files_exit_two_with_a_position() {
    let o = olp(&["check", "--game", "tests/fixtures/malformed.json", "--property", "axioms", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5 column 3"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn input_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["maximin", "--game", "tests/fixtures/pennies.json"],
        &["bounds", "--game", "tests/fixtures/pennies.json", "--player", "3", "--y", "0.5,0.5"],
        &["bounds", "--game", "tests/fixtures/pennies.json", "--player", "1", "--x", "0.7,0.7", "--y", "0.5,0.5"],
        &["perceive", "--game", "tests/fixtures/missing.json", "--level", "1"],
        &["perceive", "--game", "tests/fixtures/pennies.json", "--level", "0"],
        &["reduce", "--game", "tests/fixtures/table_general.json"],
        &["reduce", "--game", "tests/fixtures/table_zero_sum.json", "--out", "/dev/null"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = olp(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn elapsed_time_is_zeroed_only_in_ci_mode() {
    let o = olp(&["perceive", "--game", "tests/fixtures/pennies.json", "--level", "1"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["elapsed_ms"], 0);
    let plain = Command::new(env!("CARGO_BIN_EXE_olp"))
        .args(["maximin", "--game", "tests/fixtures/pennies.json"])
        .current_dir(crate_dir())
        .env_remove("OLP_CI")
        .output()
        .unwrap();
    assert_eq!(plain.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&plain.stdout).unwrap();
    assert_eq!(report["seed"], 0);
}
