mod common;

use common::corpus;

#[test]
fn golden_corpus() {
    let (valid, malformed) = corpus::run_corpus().unwrap_or_else(|e| panic!("{}", e.join("\n")));
    assert!(valid >= 10 && malformed >= 5);
}

#[test]
fn print_parse_fixpoint_on_random_specs() {
    let errors = corpus::fixpoint(1000, 2024);
    assert!(errors.is_empty(), "{}", errors[..errors.len().min(3)].join("\n"));
}
