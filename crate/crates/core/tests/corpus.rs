use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use causa::corpus::{self, Outcome, FIXTURES};

/// Golden rows the engine disagrees with. Under the definition as written,
/// the three votes against also pass (a witness fixes two dissenters at 0 and
/// one supporter at 1), so these stay asserted and failing.
const KNOWN_DISAGREEMENTS: &[&str] = &["Def2: A3=0 causes O=1", "Def2: causes of O=1 up to size 5"];

#[test]
fn every_fixture_is_used() {
    let cases = corpus::load().unwrap();
    let used: BTreeSet<&str> = cases.iter().map(|c| c.spec.file.as_str()).collect();
    let shipped: BTreeSet<&str> = FIXTURES.iter().map(|(f, _)| *f).collect();
    assert_eq!(used, shipped);
}

#[test]
fn golden_verdicts() {
    let start = Instant::now();
    let report = corpus::run_corpus(None).unwrap();
    assert!(start.elapsed() < Duration::from_secs(60));
    assert!(report.count(Outcome::Pass) > 100);
    let failing: Vec<String> = report.failures().map(|c| c.to_string()).collect();
    let unexpected: Vec<&String> = report
        .failures()
        .zip(&failing)
        .filter(|(c, _)| !(c.case == "voting" && KNOWN_DISAGREEMENTS.iter().any(|q| c.query.starts_with(q))))
        .map(|(_, s)| s)
        .collect();
    assert!(unexpected.is_empty(), "{unexpected:#?}");
    assert_eq!(failing.len(), KNOWN_DISAGREEMENTS.len(), "{failing:#?}");
}

#[test]
fn asserted_checks_carry_citations() {
    let report = corpus::run_corpus(None).unwrap();
    for c in &report.checks {
        assert_eq!(c.cite.is_some(), c.outcome != Outcome::Unasserted, "{c}");
    }
}

#[test]
fn filters_select_cases() {
    let report = corpus::run_corpus(Some("prisoner")).unwrap();
    assert!(!report.checks.is_empty());
    assert!(report.checks.iter().all(|c| c.case.contains("prisoner")));
    assert!(report.all_pass());
    assert!(corpus::run_corpus(Some("no such case")).unwrap().checks.is_empty());
}

#[test]
fn positive_verdicts_show_their_evidence() {
    let report = corpus::run_corpus(Some("late-preemption")).unwrap();
    let st = report.case("late-preemption").find(|c| c.query == "Def2: ST=1 causes BS=1").unwrap();
    assert_eq!(st.actual, "true");
    assert!(st.detail.as_deref().unwrap().contains("N={"));
}
