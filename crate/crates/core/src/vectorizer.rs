//! Top-n frequency vocabulary and TF-IDF document vectors scaled into [0,1].
//!
//! The vocabulary and the per-feature scaling maxima are fitted on the
//! training split only; test vectors reuse the stored maxima and are clamped
//! into [0,1].

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::textprep::TokenizedDoc;

#[derive(Debug, thiserror::Error)]
pub enum VectorizerError {
    #[error("vocabulary size must be >= 1")]
    BadSize,
    #[error("all documents are empty; cannot build a vocabulary")]
    EmptyVocabulary,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> VectorizerError {
    VectorizerError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Top-n vocabulary ordered by descending collection frequency, ties broken
/// lexicographically ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub collection_freq: Vec<u64>,
    pub doc_freq: Vec<u64>,
    pub corpus_size: usize,
    /// Per-feature training maxima, present once scaling has been fitted.
    pub scaling_maxima: Option<Vec<f64>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVector {
    pub doc_id: String,
    pub values: Vec<f64>,
}

/// Builds the vocabulary of the n highest collection-frequency stems.
/// If fewer than n distinct stems exist, all of them are kept.
pub fn build_vocabulary(docs: &[TokenizedDoc], n: usize) -> Result<Vocabulary, VectorizerError> {
    if n == 0 {
        return Err(VectorizerError::BadSize);
    }
    let mut collection: HashMap<&str, u64> = HashMap::new();
    let mut document: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for tok in &doc.tokens {
            *collection.entry(tok).or_insert(0) += 1;
            if seen.insert(tok, ()).is_none() {
                *document.entry(tok).or_insert(0) += 1;
            }
        }
    }
    if collection.is_empty() {
        return Err(VectorizerError::EmptyVocabulary);
    }
    let mut ranked: Vec<(&str, u64)> = collection.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(n);

    let mut vocab = Vocabulary {
        terms: ranked.iter().map(|(t, _)| t.to_string()).collect(),
        collection_freq: ranked.iter().map(|&(_, c)| c).collect(),
        doc_freq: ranked.iter().map(|&(t, _)| document[t]).collect(),
        corpus_size: docs.len(),
        scaling_maxima: None,
        index: HashMap::new(),
    };
    vocab.rebuild_index();
    Ok(vocab)
}

/// Raw TF-IDF weights: component k = tf(term_k) * ln(|D| / DF_k).
pub fn tfidf_vector(doc: &TokenizedDoc, vocab: &Vocabulary) -> DocVector {
    let mut counts = vec![0u64; vocab.len()];
    for tok in &doc.tokens {
        if let Some(i) = vocab.term_index(tok) {
            counts[i] += 1;
        }
    }
    let n = vocab.corpus_size as f64;
    let values = counts
        .iter()
        .zip(&vocab.doc_freq)
        .map(|(&tf, &df)| tf as f64 * (n / df as f64).ln())
        .collect();
    DocVector {
        doc_id: doc.id.clone(),
        values,
    }
}

/// Fits per-feature max scaling on training vectors and rescales them in
/// place. Features whose training maximum is zero are left at zero.
/// Returns the maxima for scaling test vectors later.
pub fn fit_scaling(train: &mut [DocVector]) -> Vec<f64> {
    let dim = train.first().map(|v| v.values.len()).unwrap_or(0);
    let mut maxima = vec![0.0f64; dim];
    for vec in train.iter() {
        for (m, &v) in maxima.iter_mut().zip(&vec.values) {
            if v > *m {
                *m = v;
            }
        }
    }
    for vec in train.iter_mut() {
        apply_scaling(vec, &maxima);
    }
    maxima
}

/// Scales a raw vector with stored training maxima, clamping into [0,1].
pub fn apply_scaling(vec: &mut DocVector, maxima: &[f64]) {
    for (v, &m) in vec.values.iter_mut().zip(maxima) {
        if m > 0.0 {
            *v = (*v / m).clamp(0.0, 1.0);
        } else {
            *v = 0.0;
        }
    }
}

pub fn save_vocabulary(vocab: &Vocabulary, path: &Path) -> Result<(), VectorizerError> {
    let json = serde_json::to_string_pretty(vocab).expect("vocabulary serializes");
    fs::write(path, json).map_err(|e| io_err(path, e))
}

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary, VectorizerError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut vocab: Vocabulary =
        serde_json::from_str(&text).map_err(|e| VectorizerError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    vocab.rebuild_index();
    Ok(vocab)
}

/// Writes vectors as CSV with header `doc_id,f0,...,f{n-1}`. Values are
/// printed in scientific notation with 16 fractional digits, enough to
/// round-trip an f64 exactly.
pub fn save_vectors(vectors: &[DocVector], path: &Path) -> Result<(), VectorizerError> {
    let dim = vectors.first().map(|v| v.values.len()).unwrap_or(0);
    let mut out = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let header: Vec<String> = std::iter::once("doc_id".to_string())
        .chain((0..dim).map(|i| format!("f{i}")))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| io_err(path, e))?;
    let mut line = String::new();
    for vec in vectors {
        line.clear();
        line.push_str(&vec.doc_id);
        for v in &vec.values {
            line.push(',');
            line.push_str(&format!("{v:.16e}"));
        }
        writeln!(out, "{line}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

pub fn load_vectors(path: &Path) -> Result<Vec<DocVector>, VectorizerError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let _header = lines.next().transpose().map_err(|e| io_err(path, e))?;
    let mut vectors = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let doc_id = fields
            .next()
            .ok_or_else(|| VectorizerError::Format {
                path: path.display().to_string(),
                message: format!("line {}: missing doc_id", i + 2),
            })?
            .to_string();
        let values = fields
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| VectorizerError::Format {
                path: path.display().to_string(),
                message: format!("line {}: {e}", i + 2),
            })?;
        vectors.push(DocVector { doc_id, values });
    }
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            id: id.into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn vocabulary_tie_break_is_lexicographic() {
        let docs = [doc("d1", &["a", "a", "b"]), doc("d2", &["b", "c"])];
        let vocab = build_vocabulary(&docs, 2).unwrap();
        assert_eq!(vocab.terms, vec!["a", "b"]);
    }

    #[test]
    fn vocabulary_clamps_to_distinct_stems() {
        let docs = [doc("d1", &["x", "y"])];
        let vocab = build_vocabulary(&docs, 10).unwrap();
        assert_eq!(vocab.len(), 2);
    }

    #[test]
    fn doc_freq_is_document_count() {
        let docs = [
            doc("d1", &["x", "x", "x"]),
            doc("d2", &["y"]),
            doc("d3", &["x", "y"]),
        ];
        let vocab = build_vocabulary(&docs, 2).unwrap();
        assert_eq!(vocab.terms, vec!["x", "y"]);
        assert_eq!(vocab.doc_freq, vec![2, 2]);
        assert_eq!(vocab.collection_freq, vec![4, 2]);
    }

    #[test]
    fn empty_documents_error() {
        let docs = [doc("d1", &[]), doc("d2", &[])];
        assert!(matches!(
            build_vocabulary(&docs, 5),
            Err(VectorizerError::EmptyVocabulary)
        ));
        assert!(matches!(
            build_vocabulary(&[doc("d", &["a"])], 0),
            Err(VectorizerError::BadSize)
        ));
    }

    #[test]
    fn tfidf_components() {
        // 3-doc corpus; "x" appears in 1 of 3 docs, twice in d1.
        let docs = [
            doc("d1", &["x", "x", "z"]),
            doc("d2", &["z"]),
            doc("d3", &["z"]),
        ];
        let vocab = build_vocabulary(&docs, 2).unwrap();
        let v = tfidf_vector(&docs[0], &vocab);
        let zi = vocab.term_index("z").unwrap();
        let xi = vocab.term_index("x").unwrap();
        // term in every document: idf = ln 1 = 0
        assert_eq!(v.values[zi], 0.0);
        // 2 * ln(3/1)
        assert!((v.values[xi] - 2.0 * 3f64.ln()).abs() < 1e-12);
        // absent term is 0
        let v2 = tfidf_vector(&docs[1], &vocab);
        assert_eq!(v2.values[xi], 0.0);
    }

    #[test]
    fn tfidf_is_linear_in_counts() {
        let docs = [doc("d1", &["x", "y"]), doc("d2", &["y"])];
        let vocab = build_vocabulary(&docs, 2).unwrap();
        let single = tfidf_vector(&doc("q", &["x", "y"]), &vocab);
        let double = tfidf_vector(&doc("q", &["x", "y", "x", "y"]), &vocab);
        for (a, b) in single.values.iter().zip(&double.values) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn max_scaling_and_clamping() {
        let mut train = vec![
            DocVector {
                doc_id: "a".into(),
                values: vec![0.0, 1.0],
            },
            DocVector {
                doc_id: "b".into(),
                values: vec![2.0, 0.0],
            },
            DocVector {
                doc_id: "c".into(),
                values: vec![4.0, 0.0],
            },
        ];
        let maxima = fit_scaling(&mut train);
        assert_eq!(maxima, vec![4.0, 1.0]);
        assert_eq!(train[0].values, vec![0.0, 1.0]);
        assert_eq!(train[1].values, vec![0.5, 0.0]);
        assert_eq!(train[2].values, vec![1.0, 0.0]);

        // test value above the training max clamps to 1; zero-max stays 0
        let mut test = DocVector {
            doc_id: "t".into(),
            values: vec![5.0, 0.0],
        };
        apply_scaling(&mut test, &[4.0, 0.0]);
        assert_eq!(test.values, vec![1.0, 0.0]);
    }

    #[test]
    fn vector_csv_round_trip_is_exact() {
        let vectors = vec![DocVector {
            doc_id: "g/1".into(),
            values: vec![0.1, 1.0 / 3.0, 2.0 * 3f64.ln()],
        }];
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("vectors.csv");
        save_vectors(&vectors, &path).unwrap();
        let back = load_vectors(&path).unwrap();
        assert_eq!(back, vectors);
    }
}
