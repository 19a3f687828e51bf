//! Loading, splitting, and persisting newsgroup-style labeled document
//! collections.
//!
//! The expected on-disk layout is one immediate subdirectory per topic, with
//! one regular file per document. A corpus is persisted as a JSON Lines
//! manifest, one object per line with keys `id`, `label`, `split`, `text`.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("no documents found under {0}")]
    Empty(String),
    #[error("split ratio must be in (0,1), got {0}")]
    BadRatio(f64),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(rename = "label")]
    pub gold_label: Option<String>,
    pub split: Option<Split>,
}

/// An immutable, ordered document collection. Order is lexicographic by id
/// (byte-wise) after loading and stays stable from then on.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// Count of byte sequences replaced with U+FFFD while decoding.
    pub decode_warnings: usize,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        Corpus {
            documents,
            decode_warnings: 0,
        }
    }

    /// Distinct gold labels present, sorted.
    pub fn labels(&self) -> Vec<String> {
        self.documents
            .iter()
            .filter_map(|d| d.gold_label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn iter_split(&self, split: Split) -> impl Iterator<Item = &Document> {
        self.documents
            .iter()
            .filter(move |d| d.split == Some(split))
    }
}

/// Strips newsgroup headers: everything up to and including the first blank
/// line. If there is no blank line the text is returned unchanged.
pub fn strip_headers(text: &str) -> &str {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        offset += line.len();
        if line.trim().is_empty() {
            return &text[offset..];
        }
    }
    text
}

fn read_lossy(path: &Path, warnings: &mut usize) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    match String::from_utf8(bytes) {
        Ok(s) => Ok(s),
        Err(e) => {
            *warnings += 1;
            Ok(String::from_utf8_lossy(e.as_bytes()).into_owned())
        }
    }
}

fn load_group_dirs(
    root: &Path,
    split: Option<Split>,
    strip: bool,
    id_prefix: &str,
    docs: &mut Vec<Document>,
    warnings: &mut usize,
) -> Result<(), CorpusError> {
    for group in fs::read_dir(root).map_err(|e| io_err(root, e))? {
        let group = group.map_err(|e| io_err(root, e))?.path();
        if !group.is_dir() {
            continue;
        }
        let label = group
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        for entry in fs::read_dir(&group).map_err(|e| io_err(&group, e))? {
            let file = entry.map_err(|e| io_err(&group, e))?.path();
            if !file.is_file() {
                continue;
            }
            let name = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let raw = read_lossy(&file, warnings)?;
            let text = if strip {
                strip_headers(&raw).to_string()
            } else {
                raw
            };
            docs.push(Document {
                id: format!("{id_prefix}{label}/{name}"),
                text,
                gold_label: Some(label.clone()),
                split,
            });
        }
    }
    Ok(())
}

/// Loads a directory tree where each immediate subdirectory is one topic and
/// each regular file inside is one document. Documents get
/// `id = "<subdir>/<filename>"` and are ordered lexicographically by id.
pub fn load_newsgroups_dir(path: &Path, strip: bool) -> Result<Corpus, CorpusError> {
    let mut docs = Vec::new();
    let mut warnings = 0;
    load_group_dirs(path, None, strip, "", &mut docs, &mut warnings)?;
    if docs.is_empty() {
        return Err(CorpusError::Empty(path.display().to_string()));
    }
    docs.sort_by(|a, b| a.id.as_bytes().cmp(b.id.as_bytes()));
    Ok(Corpus {
        documents: docs,
        decode_warnings: warnings,
    })
}

/// Loads a tree already separated into `train/` and `test/` roots, tagging
/// each document's split from the root it came from.
pub fn load_newsgroups_predefined(path: &Path, strip: bool) -> Result<Corpus, CorpusError> {
    let mut docs = Vec::new();
    let mut warnings = 0;
    for (sub, split) in [("train", Split::Train), ("test", Split::Test)] {
        let root = path.join(sub);
        if root.is_dir() {
            load_group_dirs(
                &root,
                Some(split),
                strip,
                &format!("{sub}/"),
                &mut docs,
                &mut warnings,
            )?;
        }
    }
    if docs.is_empty() {
        return Err(CorpusError::Empty(path.display().to_string()));
    }
    docs.sort_by(|a, b| a.id.as_bytes().cmp(b.id.as_bytes()));
    Ok(Corpus {
        documents: docs,
        decode_warnings: warnings,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum SplitStrategy {
    /// Splits were assigned at load time from separate train/test roots.
    Predefined,
    /// Seeded stratified random split; `ratio` is the train fraction.
    Random { ratio: f64, seed: u64 },
}

/// Assigns a split tag to every document. The random strategy is stratified
/// per label and deterministic given the seed.
pub fn split_corpus(corpus: &Corpus, strategy: SplitStrategy) -> Result<Corpus, CorpusError> {
    match strategy {
        SplitStrategy::Predefined => {
            // Nothing to compute; just check every document is tagged.
            if corpus.documents.iter().any(|d| d.split.is_none()) {
                return Err(CorpusError::Manifest {
                    line: 0,
                    message: "predefined split requested but documents are untagged".into(),
                });
            }
            Ok(corpus.clone())
        }
        SplitStrategy::Random { ratio, seed } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(CorpusError::BadRatio(ratio));
            }
            let mut out = corpus.clone();
            let labels: BTreeSet<Option<String>> = out
                .documents
                .iter()
                .map(|d| d.gold_label.clone())
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Cumulative allocation keeps the global train count at
            // round(ratio * n) while each label stays within one document
            // of its own proportional share.
            let mut seen = 0usize;
            let mut allocated = 0usize;
            for label in labels {
                let mut idx: Vec<usize> = out
                    .documents
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| d.gold_label == label)
                    .map(|(i, _)| i)
                    .collect();
                idx.shuffle(&mut rng);
                seen += idx.len();
                let n_train = (ratio * seen as f64).round() as usize - allocated;
                allocated += n_train;
                for (k, i) in idx.into_iter().enumerate() {
                    out.documents[i].split = Some(if k < n_train {
                        Split::Train
                    } else {
                        Split::Test
                    });
                }
            }
            Ok(out)
        }
    }
}

/// Writes the corpus manifest as JSON Lines (UTF-8, LF).
pub fn save_manifest(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let mut out = Vec::new();
    for doc in &corpus.documents {
        serde_json::to_writer(&mut out, doc).expect("document serializes");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| CorpusError::Manifest {
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    if docs.is_empty() {
        return Err(CorpusError::Empty(path.display().to_string()));
    }
    Ok(Corpus::new(docs))
}

/// Convenience used by tests and fixtures: writes documents out as a
/// newsgroups-style directory tree.
pub fn write_tree(corpus: &Corpus, root: &Path) -> Result<(), CorpusError> {
    for doc in &corpus.documents {
        let rel = Path::new(&doc.id);
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        f.write_all(doc.text.as_bytes())
            .map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn make_tree(spec: &[(&str, &[(&str, &str)])]) -> TempDir {
        let dir = TempDir::new().unwrap();
        for (group, files) in spec {
            let g = dir.path().join(group);
            fs::create_dir_all(&g).unwrap();
            for (name, text) in *files {
                fs::write(g.join(name), text).unwrap();
            }
        }
        dir
    }

    #[test]
    fn load_two_groups_two_files() {
        let dir = make_tree(&[
            ("alpha", &[("1.txt", "aa"), ("2.txt", "bb")]),
            ("beta", &[("1.txt", "cc"), ("2.txt", "dd")]),
        ]);
        let corpus = load_newsgroups_dir(dir.path(), false).unwrap();
        assert_eq!(corpus.len(), 4);
        assert_eq!(corpus.labels(), vec!["alpha", "beta"]);
        assert_eq!(corpus.documents[0].id, "alpha/1.txt");
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = TempDir::new().unwrap();
        assert!(matches!(
            load_newsgroups_dir(dir.path(), false),
            Err(CorpusError::Empty(_))
        ));
    }

    #[test]
    fn missing_path_is_io_error() {
        assert!(matches!(
            load_newsgroups_dir(Path::new("/nonexistent/xyz"), false),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn undecodable_bytes_are_replaced_and_counted() {
        let dir = TempDir::new().unwrap();
        let g = dir.path().join("g");
        fs::create_dir_all(&g).unwrap();
        fs::write(g.join("bad.txt"), b"ok \xff\xfe bytes").unwrap();
        let corpus = load_newsgroups_dir(dir.path(), false).unwrap();
        assert_eq!(corpus.decode_warnings, 1);
        assert!(corpus.documents[0].text.contains('\u{FFFD}'));
    }

    #[test]
    fn header_stripping_removes_up_to_first_blank_line() {
        let text = "From: a@b\nSubject: x\n\nbody line\n";
        assert_eq!(strip_headers(text), "body line\n");
        assert_eq!(strip_headers("no blank line"), "no blank line");
    }

    #[test]
    fn random_split_is_stratified_and_deterministic() {
        let docs: Vec<Document> = (0..10)
            .map(|i| Document {
                id: format!("d{i}"),
                text: String::new(),
                gold_label: Some(if i < 5 { "a".into() } else { "b".into() }),
                split: None,
            })
            .collect();
        let corpus = Corpus::new(docs);
        let s1 = split_corpus(
            &corpus,
            SplitStrategy::Random {
                ratio: 0.5,
                seed: 7,
            },
        )
        .unwrap();
        let s2 = split_corpus(
            &corpus,
            SplitStrategy::Random {
                ratio: 0.5,
                seed: 7,
            },
        )
        .unwrap();
        assert_eq!(s1, s2);
        for label in ["a", "b"] {
            let train = s1
                .documents
                .iter()
                .filter(|d| d.gold_label.as_deref() == Some(label) && d.split == Some(Split::Train))
                .count();
            assert!((2..=3).contains(&train), "stratified, got {train}");
        }
        assert_eq!(s1.iter_split(Split::Train).count(), 5);
        assert_eq!(s1.iter_split(Split::Test).count(), 5);
    }

    #[test]
    fn bad_ratio_rejected() {
        let corpus = Corpus::new(vec![Document {
            id: "d".into(),
            text: String::new(),
            gold_label: None,
            split: None,
        }]);
        assert!(matches!(
            split_corpus(
                &corpus,
                SplitStrategy::Random {
                    ratio: 1.5,
                    seed: 0
                }
            ),
            Err(CorpusError::BadRatio(_))
        ));
    }

    #[test]
    fn manifest_round_trip() {
        let dir = make_tree(&[("g", &[("1.txt", "hello world")])]);
        let mut corpus = load_newsgroups_dir(dir.path(), false).unwrap();
        corpus.documents[0].split = Some(Split::Train);
        let path = dir.path().join("manifest.jsonl");
        save_manifest(&corpus, &path).unwrap();
        let back = load_manifest(&path).unwrap();
        assert_eq!(back.documents, corpus.documents);
    }
}
