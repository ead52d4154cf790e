//! End-to-end acceptance gate.  Runs every criterion suite, prints one
//! pass/fail line per criterion, and enforces the per-suite time
//! budgets where one applies.  Instance grids and capacity caps are
//! pinned inside the suites module.

use drinlev::suites::run_all;

// wall-clock budgets in milliseconds, by criterion id
const BUDGETS: [(u32, u128); 5] = [(1, 60_000), (2, 120_000), (3, 60_000), (5, 60_000), (7, 120_000)];

#[test]
fn acceptance() {
    let results = run_all();
    assert_eq!(results.len(), 10);
    let mut all = true;
    for r in &results {
        let budget = BUDGETS.iter().find(|(id, _)| *id == r.id).map(|(_, b)| *b);
        let in_budget = budget.map_or(true, |b| r.millis <= b);
        println!(
            "criterion {:2} [{}] {} ({} ms{})",
            r.id,
            if r.pass && in_budget { "PASS" } else { "FAIL" },
            r.name,
            r.millis,
            match budget {
                Some(b) => format!(" / budget {b}"),
                None => String::new(),
            }
        );
        if !r.pass {
            println!(
                "  details: {}",
                serde_json::to_string_pretty(&r.details).unwrap()
            );
        }
        all &= r.pass && in_budget;
    }
    assert!(all, "one or more acceptance criteria failed");
}
