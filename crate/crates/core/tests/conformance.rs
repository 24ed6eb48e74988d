//! Output tokens compared with the host C preprocessor.

mod common;

use common::host_cpp::{first_difference, host_lexemes, ours};

#[test]
fn golden_corpus_matches_host_preprocessor() {
    for f in common::golden_files() {
        let (a, b) = (ours(&f.name, &f.source), host_lexemes(&f.source));
        assert!(a == b, "{}: {}", f.name, first_difference(&a, &b));
    }
}

#[test]
fn stress_files_match_host_preprocessor() {
    for seed in 0..50 {
        let src = common::stress::stress_file(seed);
        let name = format!("stress{seed}.c");
        let (a, b) = (ours(&name, &src), host_lexemes(&src));
        assert!(a == b, "{name}: {}\n{src}", first_difference(&a, &b));
    }
}


