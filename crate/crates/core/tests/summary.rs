mod common;

use common::{analyze, golden_files, mismatches, mixed_file};
use macport::report::Report;

#[test]
fn mixed_corpus_matches_expectations() {
    let f = mixed_file();
    assert_eq!(f.expectations.len(), 20);
    let m = mismatches(&f, &analyze(&f, false));
    assert!(m.is_empty(), "{}", m.join("\n"));
}

#[test]
fn interface_equivalent_exceeds_baseline() {
    let s = analyze(&mixed_file(), false).summary();
    assert_eq!(s.baseline, 3);
    assert_eq!(s.interface_equivalent, 13);
    assert!(s.interface_equivalent > s.baseline);
}

#[test]
fn baseline_definitions_are_interface_equivalent() {
    let mut files = golden_files();
    files.push(mixed_file());
    for f in &files {
        for v in analyze(f, false).definitions() {
            assert!(!v.baseline || v.is_interface_equivalent(), "{}: {}", f.name, v.definition.name);
        }
    }
}

#[test]
fn aligned_share_is_at_least_interface_equivalent_share() {
    let mut whole = Report::default();
    for f in golden_files() {
        let r = analyze(&f, false);
        let s = r.summary();
        assert!(s.aligned_percent >= s.interface_equivalent_percent, "{}", f.name);
        whole = whole.merge(r);
    }
    let s = whole.summary();
    assert!(s.aligned_percent >= s.interface_equivalent_percent);
}
