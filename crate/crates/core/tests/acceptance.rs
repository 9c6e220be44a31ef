//! The acceptance suite: runs every verification criterion at its stated
//! tolerance and prints one pass/fail line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to watch the
//! lines as they complete; the same suites are reachable through
//! `deltadist verify all`.

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for (id, _) in deltadist::verify::SUITES {
        let report = deltadist::verify::run(*id);
        println!("{}", report.line());
        for detail in &report.details {
            println!("  {detail}");
        }
        if !report.passed {
            failed.push(format!("criterion {} ({})", report.id, report.name));
        }
    }
    assert!(failed.is_empty(), "failed: {}", failed.join(", "));
}
