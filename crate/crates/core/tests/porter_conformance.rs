//! Conformance check of the Porter stemmer against the frozen reference
//! vectors in `tests/data/porter_vectors.tsv` (word <TAB> expected stem,
//! one pair per line).

use clusart_core::textprep::porter_stem;

fn load_vectors() -> Vec<(String, String)> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/porter_vectors.tsv");
    let text = std::fs::read_to_string(path).expect("fixture readable");
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (w, s) = l.split_once('\t').expect("tab-separated pair");
            (w.to_string(), s.to_string())
        })
        .collect()
}

#[test]
fn conformance_is_at_least_99_9_percent() {
    let vectors = load_vectors();
    assert!(vectors.len() > 50_000, "fixture unexpectedly small");
    let mut mismatches = Vec::new();
    for (word, expected) in &vectors {
        let got = porter_stem(word);
        if &got != expected {
            mismatches.push(format!("{word}: got {got}, want {expected}"));
        }
    }
    let rate = 1.0 - mismatches.len() as f64 / vectors.len() as f64;
    assert!(
        rate >= 0.999,
        "conformance {rate:.6} below 99.9%; first mismatches: {:#?}",
        &mismatches[..mismatches.len().min(20)]
    );
}

#[test]
fn plural_pairs_match_exactly() {
    assert_eq!(porter_stem("apples"), "appl");
    assert_eq!(porter_stem("berries"), "berri");
}
