//! End-to-end checks of the compiled binary: printed values, exit codes, and
//! byte-stable output at a fixed seed.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xorgame"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("xorgame-cli-test-{}-{name}", std::process::id()))
}

/// Numeric field following `label` on its line of `text`.
fn field_after(text: &str, label: &str) -> f64 {
    let line = text.lines().find(|l| l.contains(label)).unwrap_or_else(|| {
        panic!("no line contains {label:?} in:\n{text}")
    });
    line[line.find(label).unwrap() + label.len()..]
        .split_whitespace()
        .next()
        .expect("value after label")
        .parse()
        .expect("numeric field")
}

#[test]
fn bias_chsh_endpoint() {
    let out = run(&["bias", "and", "--p", "1", "--q", "1"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("game: and(p=1,q=1) (4x4 questions)"), "{text}");
    assert!(text.contains("classical bias: 0.500000000000"), "{text}");
    assert!(text.contains("quantum lower:  0.707106781187"), "{text}");
    assert!(text.contains("quantum upper:  0.707106781187"), "{text}");
    assert!(text.contains("closed form:    0.707106781187  (region 2)"), "{text}");
}

#[test]
fn bias_unperturbed_center_shows_no_advantage() {
    let out = run(&["bias", "and", "--p", "0.5", "--q", "0.5"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("classical bias: 0.500000000000"), "{text}");
    assert!(text.contains("quantum lower:  0.500000000000"), "{text}");
    assert!(text.contains("quantum upper:  0.500000000000"), "{text}");
    assert!(text.contains("(region boundary)"), "{text}");
}

#[test]
fn bias_magic_square_beats_classical() {
    let out = run(&["bias", "magic-square"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("game: magic-square (4x4 questions)"), "{text}");
    assert!(text.contains("classical bias: 0.500000000000"), "{text}");
    let lower = field_after(&text, "quantum lower:");
    assert!(lower >= 0.5910, "quantum lower {lower} in:\n{text}");
}

#[test]
fn bias_sum_of_two_chsh_is_multiplicative() {
    let out = run(&["bias", "--restarts", "8", "sum", "and:1:1", "and:1:1"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("(16x16 questions)"), "{text}");
    assert!(text.contains("quantum lower:  0.500000000000"), "{text}");
}

#[test]
fn bias_distributed_spec_file() {
    let path = temp_path("spec.json");
    std::fs::write(
        &path,
        r#"{"partition":["A","B"],"probs":[0.8,0.6],"input_dist":[0.25,0.25,0.25,0.25],"g":[0,0,0,1]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["bias", "distributed", "--spec-file"])
        .arg(&path)
        .output()
        .expect("binary should run");
    std::fs::remove_file(&path).ok();
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("(4x4 questions)"), "{text}");
    assert!(text.contains("classical bias: 0.500000000000"), "{text}");
    // Knowledge levels (0.8, 0.6) put the game in region 1 of the AND family.
    let lower = field_after(&text, "quantum lower:");
    let closed = (0.52f64).sqrt() * (0.68f64).sqrt();
    assert!((lower - closed).abs() <= 1e-6, "lower {lower} vs closed form {closed}");
}

#[test]
fn bias_rejects_unknown_sum_spec() {
    let out = run(&["bias", "sum", "nand:0.6:0.7"]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("unknown game spec"), "{}", stderr(&out));
}

#[test]
fn sweep_writes_deterministic_csv() {
    let first = temp_path("sweep-a.csv");
    let second = temp_path("sweep-b.csv");
    let out = bin().args(["sweep", "--out"]).arg(&first).output().expect("binary should run");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("wrote 36 rows"), "{}", stdout(&out));

    let rerun = bin()
        .args(["sweep", "--out"])
        .arg(&second)
        .env("XORGAME_THREADS", "1")
        .output()
        .expect("binary should run");
    assert_eq!(code(&rerun), 0, "stderr: {}", stderr(&rerun));

    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    std::fs::remove_file(&first).ok();
    std::fs::remove_file(&second).ok();
    assert_eq!(a, b, "CSV output must be byte-stable across runs and worker counts");

    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 37);
    assert_eq!(lines[0], "p,q,classical_bias,quantum_lower,quantum_upper,closed_form,region");
    assert!(lines[1].starts_with("0.500000000000,0.500000000000,0.500000000000,"), "{}", lines[1]);
    assert!(lines[1].ends_with(",boundary"), "{}", lines[1]);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7, "{row}");
        let lower: f64 = cols[3].parse().unwrap();
        let upper: f64 = cols[4].parse().unwrap();
        let closed: f64 = cols[5].parse().unwrap();
        assert!((lower - closed).abs() <= 1e-6, "{row}");
        assert!(upper >= lower - 1e-12, "{row}");
    }
}

#[test]
fn sweep_rejects_range_outside_the_square() {
    let out = bin()
        .args(["sweep", "--p-start", "0.4", "--out"])
        .arg(temp_path("rejected.csv"))
        .output()
        .expect("binary should run");
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("must satisfy"), "{}", stderr(&out));
}

#[test]
fn verify_strategy_chsh_report() {
    let out = run(&["verify-strategy", "2", "--p", "1", "--q", "1", "--rounds", "200000"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("region 2 strategy at p = 1, q = 1 (local dimension 2)"), "{text}");
    assert!(text.contains("exact bias:   0.707106781187"), "{text}");
    let rate = field_after(&text, "(seed 0):");
    let target = (1.0 + std::f64::consts::FRAC_1_SQRT_2) / 2.0;
    let sigma = (target * (1.0 - target) / 200_000.0).sqrt();
    assert!((rate - target).abs() <= 3.0 * sigma, "win rate {rate} vs {target}");
}

#[test]
fn verify_strategy_region1_report() {
    let out = run(&["verify-strategy", "1", "--p", "0.6", "--q", "0.8", "--rounds", "50000"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("(local dimension 4)"), "{text}");
    assert!(text.contains("resolved angle beta:"), "{text}");
    assert!(text.contains("closed form:  0.594642749893"), "{text}");
    let bias = field_after(&text, "exact bias:");
    assert!((bias - 0.594642749893).abs() <= 1e-6, "{text}");
}

#[test]
fn verify_strategy_degenerate_normalization() {
    let out = run(&["verify-strategy", "2", "--p", "0.5", "--q", "0.9"]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("degenerate input"), "{}", stderr(&out));
}

#[test]
fn verify_strategy_bad_region_is_usage_error() {
    let out = run(&["verify-strategy", "3", "--p", "0.8", "--q", "0.8"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("region must be 1 or 2"), "{}", stderr(&out));
}

#[test]
fn missing_required_flag_is_usage_error() {
    let out = run(&["bias", "and", "--p", "1"]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
}

#[test]
fn help_and_version_exit_cleanly() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("Usage"), "{}", stdout(&help));

    let version = run(&["--version"]);
    assert_eq!(code(&version), 0);
    assert!(stdout(&version).contains("xorgame"), "{}", stdout(&version));
}

#[test]
fn invalid_thread_env_is_usage_error() {
    let out = bin()
        .args(["bias", "and", "--p", "1", "--q", "1"])
        .env("XORGAME_THREADS", "abc")
        .output()
        .expect("binary should run");
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("XORGAME_THREADS"), "{}", stderr(&out));
}

#[test]
fn bias_output_is_bit_stable() {
    let first = run(&["bias", "and", "--p", "0.77", "--q", "0.66"]);
    let second = run(&["bias", "and", "--p", "0.77", "--q", "0.66"]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn reproduce_reports_every_criterion() {
    let path = temp_path("report.json");
    let out = bin().args(["reproduce", "--out"]).arg(&path).output().expect("binary should run");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for i in 1..=9 {
        assert!(text.contains(&format!("criterion {i} (")), "missing criterion {i}:\n{text}");
    }
    assert_eq!(text.matches(": PASS - ").count(), 9, "{text}");
    assert!(!text.contains("FAIL"), "{text}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(report["all_passed"], serde_json::Value::Bool(true));
    assert_eq!(report["criteria"].as_array().unwrap().len(), 9);
}
