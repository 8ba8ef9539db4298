use dvlg_core::corpus::{check, entries};
use dvlg_core::oracle::OracleLimits;

#[test]
fn every_corpus_entry_matches_its_annotations() {
    let limits = OracleLimits::default();
    let failures: Vec<_> = entries()
        .iter()
        .enumerate()
        .map(|(i, e)| check(i, e, &limits))
        .filter(|o| !o.passed())
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}
