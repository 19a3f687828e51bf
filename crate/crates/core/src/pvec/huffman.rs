//! Deterministic Huffman coding over the embedding vocabulary.
//!
//! Frequent words get short codes; ties are broken by term order (the
//! vocabulary is sorted by descending frequency, then lexicographically),
//! so two builds over the same frequency table produce identical trees.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum HuffmanError {
    #[error("huffman tree needs at least 2 distinct words, got {0}")]
    DegenerateVocabulary(usize),
}

/// Per-word bit codes and root-to-parent inner-node paths. Inner nodes are
/// indexed 0..n-1 for an n-word vocabulary; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HuffmanTree {
    /// codes[w] is the bit path (0 = first-merged child) for word w.
    pub codes: Vec<Vec<u8>>,
    /// paths[w] lists the inner nodes visited, aligned with codes[w].
    pub paths: Vec<Vec<usize>>,
    pub inner_count: usize,
}

impl HuffmanTree {
    /// Builds the tree for word frequencies given in vocabulary order.
    pub fn build(freqs: &[u64]) -> Result<Self, HuffmanError> {
        let n = freqs.len();
        if n < 2 {
            return Err(HuffmanError::DegenerateVocabulary(n));
        }
        // Node ids: 0..n are leaves (word index), n.. are merge nodes.
        // The heap is keyed by (freq, id); leaf ids follow vocabulary order,
        // so frequency ties resolve deterministically.
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = freqs
            .iter()
            .enumerate()
            .map(|(i, &f)| Reverse((f, i)))
            .collect();
        let mut children: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
        let mut next_id = n;
        while heap.len() > 1 {
            let Reverse((fa, a)) = heap.pop().expect("len > 1");
            let Reverse((fb, b)) = heap.pop().expect("len > 1");
            children.push((a, b));
            heap.push(Reverse((fa + fb, next_id)));
            next_id += 1;
        }

        // The last merge node is the root; number inner nodes from the root
        // down so index 0 is always the root.
        let inner_count = children.len();
        let inner_index = |merge_id: usize| inner_count - 1 - (merge_id - n);

        let mut codes = vec![Vec::new(); n];
        let mut paths = vec![Vec::new(); n];
        // Walk down from the root, carrying the prefix.
        let mut stack: Vec<(usize, Vec<u8>, Vec<usize>)> =
            vec![(next_id - 1, Vec::new(), Vec::new())];
        while let Some((id, code, path)) = stack.pop() {
            if id < n {
                codes[id] = code;
                paths[id] = path;
                continue;
            }
            let (left, right) = children[id - n];
            let node = inner_index(id);
            for (child, bit) in [(left, 0u8), (right, 1u8)] {
                let mut code = code.clone();
                let mut path = path.clone();
                code.push(bit);
                path.push(node);
                stack.push((child, code, path));
            }
        }
        Ok(HuffmanTree {
            codes,
            paths,
            inner_count,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.codes.len()
    }

    /// Expected code length under the given frequencies.
    pub fn expected_length(&self, freqs: &[u64]) -> f64 {
        let total: u64 = freqs.iter().sum();
        let weighted: f64 = self
            .codes
            .iter()
            .zip(freqs)
            .map(|(c, &f)| c.len() as f64 * f as f64)
            .sum();
        weighted / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_words_get_single_bit_codes() {
        let tree = HuffmanTree::build(&[3, 1]).unwrap();
        assert_eq!(tree.codes[0].len(), 1);
        assert_eq!(tree.codes[1].len(), 1);
        assert_ne!(tree.codes[0], tree.codes[1]);
        assert_eq!(tree.inner_count, 1);
    }

    #[test]
    fn frequent_word_gets_shorter_code() {
        // {a:4, b:1, c:1}: a merges last, so code(a) is shortest
        let tree = HuffmanTree::build(&[4, 1, 1]).unwrap();
        assert_eq!(tree.codes[0].len(), 1);
        assert_eq!(tree.codes[1].len(), 2);
        assert_eq!(tree.codes[2].len(), 2);
    }

    #[test]
    fn single_word_is_degenerate() {
        assert!(matches!(
            HuffmanTree::build(&[5]),
            Err(HuffmanError::DegenerateVocabulary(1))
        ));
    }

    #[test]
    fn codes_are_prefix_free() {
        let tree = HuffmanTree::build(&[9, 5, 4, 3, 3, 2, 1, 1]).unwrap();
        for (i, a) in tree.codes.iter().enumerate() {
            for (j, b) in tree.codes.iter().enumerate() {
                if i != j {
                    assert!(!(a.len() <= b.len() && &b[..a.len()] == a.as_slice()));
                }
            }
        }
    }

    #[test]
    fn code_length_monotone_in_frequency() {
        let freqs = [10, 10, 7, 5, 2, 2, 1];
        let tree = HuffmanTree::build(&freqs).unwrap();
        for i in 0..freqs.len() {
            for j in 0..freqs.len() {
                if freqs[i] > freqs[j] {
                    assert!(tree.codes[i].len() <= tree.codes[j].len());
                }
            }
        }
    }

    #[test]
    fn deterministic_across_builds() {
        let freqs = [5, 5, 5, 2, 2, 1];
        assert_eq!(
            HuffmanTree::build(&freqs).unwrap(),
            HuffmanTree::build(&freqs).unwrap()
        );
    }
}
