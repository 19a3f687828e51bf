//! Randomized property checks over the core algorithm invariants.

use proptest::prelude::*;

use clusart_core::eval::{f_measure, prf};
use clusart_core::fuzzyart::{
    complement_code, match_ratio, norm_l1, FuzzyArtModel, FuzzyArtParams,
};
use clusart_core::pvec::huffman::HuffmanTree;
use clusart_core::textprep::{porter_stem, tokenize};
use clusart_core::vectorizer::{apply_scaling, fit_scaling, DocVector};

fn unit_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, dim)
}

proptest! {
    #[test]
    fn complement_coding_fixes_the_l1_norm(
        a in prop_oneof![Just(1usize), Just(5), Just(50)].prop_flat_map(unit_vec),
    ) {
        let m = a.len() as f64;
        let coded = complement_code(&a).unwrap();
        prop_assert!((norm_l1(&coded) - m).abs() < 1e-12);
    }

    #[test]
    fn match_ratio_is_bounded(a in unit_vec(4), w in unit_vec(8)) {
        let coded = complement_code(&a).unwrap();
        let m = match_ratio(&coded, &w).unwrap();
        prop_assert!((0.0..=1.0).contains(&m), "match {m} out of range");
    }

    #[test]
    fn learning_never_increases_weights(
        docs in prop::collection::vec(unit_vec(4), 2..20),
        rho in 0.0f64..=1.0,
    ) {
        let params = FuzzyArtParams { rho, ..FuzzyArtParams::default() };
        let mut model = FuzzyArtModel::new(4, params).unwrap();
        for (i, doc) in docs.iter().enumerate() {
            let coded = model.code_input(doc).unwrap();
            let before = model.categories.clone();
            model.present(&format!("d{i}"), &coded, true).unwrap();
            for (j, old) in before.iter().enumerate() {
                for (new_c, old_c) in model.categories[j].iter().zip(old) {
                    prop_assert!(new_c <= old_c, "weight grew: {old_c} -> {new_c}");
                }
            }
        }
    }

    #[test]
    fn huffman_codes_are_prefix_free(freqs in prop::collection::vec(1u64..100, 2..12)) {
        let tree = HuffmanTree::build(&freqs).unwrap();
        for (i, a) in tree.codes.iter().enumerate() {
            for (j, b) in tree.codes.iter().enumerate() {
                if i != j {
                    prop_assert!(!b.starts_with(a), "code {i} prefixes code {j}");
                }
            }
        }
    }

    #[test]
    fn huffman_matches_brute_force_minimum(freqs in prop::collection::vec(1u64..50, 2..7)) {
        let tree = HuffmanTree::build(&freqs).unwrap();
        let got: u64 = freqs
            .iter()
            .zip(&tree.codes)
            .map(|(f, c)| f * c.len() as u64)
            .sum();
        prop_assert_eq!(got, brute_force_cost(&freqs));
    }

    #[test]
    fn f_measure_respects_harmonic_bounds(p in 0.0001f64..=1.0, r in 0.0001f64..=1.0) {
        let f = f_measure(p, r);
        prop_assert!(f >= p.min(r) - 1e-12);
        prop_assert!(f <= p.max(r) + 1e-12);
    }

    #[test]
    fn prf_is_permutation_invariant(
        pairs in prop::collection::vec((0u8..3, 0u8..3), 1..40),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let to_label = |x: u8| format!("l{x}");
        let predicted: Vec<String> = pairs.iter().map(|&(p, _)| to_label(p)).collect();
        let gold: Vec<String> = pairs.iter().map(|&(_, g)| to_label(g)).collect();
        let base = prf(&predicted, &gold).unwrap();

        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let predicted2: Vec<String> = shuffled.iter().map(|&(p, _)| to_label(p)).collect();
        let gold2: Vec<String> = shuffled.iter().map(|&(_, g)| to_label(g)).collect();
        let permuted = prf(&predicted2, &gold2).unwrap();

        prop_assert_eq!(base.macro_f, permuted.macro_f);
        prop_assert_eq!(base.micro_f, permuted.micro_f);
        prop_assert_eq!(base.counts, permuted.counts);
    }

    #[test]
    fn tokens_are_lowercase_alphanumeric(text in ".{0,200}") {
        for tok in tokenize(&text) {
            prop_assert!(!tok.is_empty());
            prop_assert!(tok.chars().all(char::is_alphanumeric));
            prop_assert_eq!(tok.clone(), tok.to_lowercase());
        }
        prop_assert_eq!(tokenize(&text.to_lowercase()), tokenize(&text));
    }

    #[test]
    fn stems_never_outgrow_their_words(word in "[a-z]{1,20}") {
        prop_assert!(porter_stem(&word).len() <= word.len());
    }

    #[test]
    fn scaling_maps_training_vectors_into_the_unit_cube(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1000.0, 6), 1..20),
        probe in prop::collection::vec(0.0f64..2000.0, 6),
    ) {
        let mut train: Vec<DocVector> = rows
            .into_iter()
            .enumerate()
            .map(|(i, values)| DocVector { doc_id: format!("d{i}"), values })
            .collect();
        let maxima = fit_scaling(&mut train);
        for v in &train {
            prop_assert!(v.values.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
        let mut test = DocVector { doc_id: "t".into(), values: probe };
        apply_scaling(&mut test, &maxima);
        prop_assert!(test.values.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}

/// Minimal weighted code length over all length assignments satisfying the
/// Kraft equality, i.e. over all full binary code trees.
fn brute_force_cost(freqs: &[u64]) -> u64 {
    let n = freqs.len();
    let max_len = n - 1;
    let mut best = u64::MAX;
    let mut lens = vec![1usize; n];
    // Kraft sum tracked in units of 2^-max_len to stay in integers.
    let unit = 1u64 << max_len;
    fn rec(freqs: &[u64], lens: &mut [usize], i: usize, unit: u64, max_len: usize, best: &mut u64) {
        if i == lens.len() {
            let kraft: u64 = lens.iter().map(|&l| unit >> l).sum();
            if kraft == unit {
                let cost = freqs
                    .iter()
                    .zip(lens.iter())
                    .map(|(f, &l)| f * l as u64)
                    .sum();
                if cost < *best {
                    *best = cost;
                }
            }
            return;
        }
        for l in 1..=max_len {
            lens[i] = l;
            rec(freqs, lens, i + 1, unit, max_len, best);
        }
    }
    rec(freqs, &mut lens, 0, unit, max_len, &mut best);
    best
}
