//! Reproduction gate: runs every numbered criterion at the default seed and
//! prints one PASS/FAIL line per criterion (visible with --nocapture).

use xorgame::acceptance::run_all;

#[test]
fn all_criteria_pass() {
    let results = run_all(0);
    assert_eq!(results.len(), 9, "expected nine criteria, got {}", results.len());

    let mut failures = Vec::new();
    for (i, c) in results.iter().enumerate() {
        assert_eq!(c.id, i + 1, "criterion ids must be sequential from 1");
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("criterion {} ({}): {} - {}", c.id, c.name, status, c.details);
        if !c.passed {
            failures.push(format!("criterion {} ({}): {}", c.id, c.name, c.details));
        }
    }
    assert!(failures.is_empty(), "failing criteria:\n{}", failures.join("\n"));
}
