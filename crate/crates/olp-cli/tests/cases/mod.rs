//! Subcommand runs on the shipped fixtures, shared by the golden and acceptance suites.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub const CASES: &[(&str, &[&str])] = &[
    ("perceive_quantized", &["perceive", "--game", "tests/fixtures/quantized.json", "--level", "1"]),
    ("perceive_table", &["perceive", "--game", "tests/fixtures/table_general.json", "--level", "1"]),
    (
        "bounds_limited_rank",
        &["bounds", "--game", "tests/fixtures/limited_rank.json", "--player", "1", "--x", "0.5,0.5", "--y", "0.5,0.5"],
    ),
    (
        "bounds_sweep_csv",
        &[
            "bounds", "--game", "tests/fixtures/quantized.json", "--player", "2", "--y", "0.25,0.75", "--sweep", "8",
            "--format", "csv",
        ],
    ),
    ("maximin_pennies", &["maximin", "--game", "tests/fixtures/pennies.json", "--seed", "1"]),
    ("maximin_limited_rank", &["maximin", "--game", "tests/fixtures/limited_rank.json", "--seed", "7"]),
    (
        "best_response_table",
        &["best-response", "--game", "tests/fixtures/table_zero_sum.json", "--x", "0.4,0.6", "--perception-id", "r0"],
    ),
    (
        "check_axioms_masked",
        &["check", "--game", "tests/fixtures/masked.json", "--property", "axioms", "--seed", "3", "--trials", "50"],
    ),
    (
        "check_constant_gap_quantized",
        &["check", "--game", "tests/fixtures/quantized.json", "--property", "constant-gap", "--seed", "2", "--trials", "40"],
    ),
    (
        "check_narrowly_reversible_limited_rank",
        &[
            "check", "--game", "tests/fixtures/limited_rank.json", "--property", "narrowly-reversible", "--seed", "2",
            "--trials", "5",
        ],
    ),
    (
        "check_stackelberg_gap_quantized",
        &[
            "check", "--game", "tests/fixtures/quantized.json", "--property", "stackelberg-gap", "--seed", "2", "--trials",
            "50",
        ],
    ),
    ("equilibrium_table_general", &["equilibrium", "--game", "tests/fixtures/table_general.json"]),
    ("equilibrium_table_zero_sum", &["equilibrium", "--game", "tests/fixtures/table_zero_sum.json"]),
    (
        "compact_repr_table",
        &["compact-repr", "--game", "tests/fixtures/table_zero_sum.json", "--eps", "1e-4", "--eval-perception", "r0"],
    ),
    (
        "oracle_masked",
        &[
            "oracle", "--game", "tests/fixtures/masked.json", "--samples", "200", "--seed", "4", "--x", "0.2,0.3,0.5",
            "--y", "0.3,0.3,0.4",
        ],
    ),
    (
        "check_constant_gap_masked_fails",
        &["check", "--game", "tests/fixtures/masked.json", "--property", "constant-gap", "--seed", "1", "--trials", "20"],
    ),
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

/// Runs the `olp` binary from the crate directory in CI mode.
pub fn olp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olp"))
        .args(args)
        .current_dir(crate_dir())
        .env("OLP_CI", "1")
        .output()
        .expect("olp runs")
}

pub fn golden(name: &str, ext: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(format!("{name}.{ext}"))
}

/// Exit code a case is expected to end with.
pub fn expected_code(name: &str) -> i32 {
    if name.ends_with("_fails") { 1 } else { 0 }
}

pub fn extension(args: &[&str]) -> &'static str {
    if args.contains(&"csv") { "csv" } else { "json" }
}
