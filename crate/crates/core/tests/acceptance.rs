//! Acceptance suite: runs every criterion and prints one line per criterion.

use mzi_core::verification::run_acceptance_matrix;
use mzi_core::Execution;

#[test]
fn acceptance_criteria() {
    let report = run_acceptance_matrix(Execution::Parallel).expect("acceptance matrix runs");
    for c in &report.criteria {
        let tag = if c.expected_fail { " (expected-fail control)" } else { "" };
        println!("criterion {:>2}: {} - {}{tag}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.title);
    }
    println!("\n{report}");
    assert_eq!(report.criteria.len(), 9);
    let failed: Vec<u8> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}\n{report}");
}
