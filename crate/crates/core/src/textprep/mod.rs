//! Lexical preprocessing: tokenization, stopword filtering, Porter stemming.
//!
//! The stages run in a fixed order — tokenize, filter stopwords, stem — and
//! every stage is a pure function, so documents can be preprocessed in
//! parallel and equal inputs always produce identical token sequences.

mod porter;

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;

pub use porter::porter_stem;

/// Default English stoplist, one lowercase term per line.
const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

#[derive(Debug, thiserror::Error)]
pub enum TextPrepError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("tokens line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Stoplist {
    terms: HashSet<String>,
}

impl Stoplist {
    pub fn new(terms: impl IntoIterator<Item = String>) -> Self {
        Stoplist {
            terms: terms.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Stoplist {
            terms: HashSet::new(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, TextPrepError> {
        let text = fs::read_to_string(path).map_err(|e| TextPrepError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(Self::parse(&text))
    }

    fn parse(text: &str) -> Self {
        Stoplist {
            terms: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
        }
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Default for Stoplist {
    fn default() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }
}

/// Splits text into lowercase tokens on whitespace and punctuation.
/// Any character that is not alphanumeric delimits; empty fragments are
/// dropped and original order is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(|s| s.to_lowercase())
        .collect()
}

/// Removes stoplist members, preserving the order of survivors.
pub fn filter_stopwords(tokens: Vec<String>, stoplist: &Stoplist) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stoplist.contains(t))
        .collect()
}

/// Full per-document pipeline: tokenize, filter stopwords, then stem.
pub fn preprocess_document(doc: &Document, stoplist: &Stoplist) -> TokenizedDoc {
    let tokens = filter_stopwords(tokenize(&doc.text), stoplist)
        .iter()
        .map(|t| porter_stem(t))
        .collect();
    TokenizedDoc {
        id: doc.id.clone(),
        tokens,
    }
}

/// Writes tokenized documents as JSON Lines: `{"id": ..., "tokens": [...]}`.
pub fn save_tokens(docs: &[TokenizedDoc], path: &Path) -> Result<(), TextPrepError> {
    let mut out = Vec::new();
    for doc in docs {
        serde_json::to_writer(&mut out, doc).expect("tokenized doc serializes");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| TextPrepError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_tokens(path: &Path) -> Result<Vec<TokenizedDoc>, TextPrepError> {
    let file = fs::File::open(path).map_err(|e| TextPrepError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| TextPrepError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(
            serde_json::from_str(&line).map_err(|e| TextPrepError::Format {
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(docs)
}
