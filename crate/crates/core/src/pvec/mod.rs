//! Paragraph Vector training and the cluster classifier used in the test
//! phase.
//!
//! PV-DM (default) predicts each word from the paragraph vector combined
//! with the surrounding context word vectors; PV-DBOW predicts the words of
//! a window from the paragraph vector alone. The output layer is a
//! hierarchical softmax over a Huffman tree, so each prediction costs
//! O(log vocabulary) sigmoid evaluations. Training is plain sequential SGD
//! with a linearly decaying learning rate and is bitwise deterministic for
//! a fixed seed.
//!
//! At test time a fresh paragraph vector is inferred by gradient descent
//! with the word vectors and softmax parameters frozen, then compared by
//! cosine against per-cluster centroids of the trained paragraph vectors.

pub mod huffman;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fuzzyart::Assignment;
use crate::textprep::TokenizedDoc;

pub use huffman::{HuffmanError, HuffmanTree};

/// Floor of the linear learning-rate decay.
const INFER_LR_SCALE: f64 = 0.01;
const MIN_LEARNING_RATE: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum PvError {
    #[error("dimensions must be >= 1")]
    BadDimensions,
    #[error("window must be >= 1")]
    BadWindow,
    #[error("epochs must be >= 1")]
    BadEpochs,
    #[error("pv_dm with average combine requires para_dim == word_dim, got {0} and {1}")]
    DimMismatch(usize, usize),
    #[error("embedding vocabulary is empty after applying min_count")]
    EmptyVocabulary,
    #[error(transparent)]
    Huffman(#[from] HuffmanError),
    #[error("document {0} has no in-vocabulary tokens")]
    NoKnownTokens(String),
    #[error("no cluster summaries to classify against")]
    NoSummaries,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PvMode {
    PvDm,
    PvDbow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Average,
    Concatenate,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PvParams {
    pub para_dim: usize,
    pub word_dim: usize,
    /// Context half-width k: up to k words on each side of the center.
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub mode: PvMode,
    pub combine: Combine,
    pub seed: u64,
    pub min_count: u64,
    pub infer_epochs: usize,
}

impl Default for PvParams {
    fn default() -> Self {
        PvParams {
            para_dim: 50,
            word_dim: 50,
            window: 4,
            learning_rate: 0.025,
            epochs: 20,
            mode: PvMode::PvDm,
            combine: Combine::Average,
            seed: 1,
            min_count: 2,
            infer_epochs: 20,
        }
    }
}

impl PvParams {
    pub fn validate(&self) -> Result<(), PvError> {
        if self.para_dim == 0 || self.word_dim == 0 {
            return Err(PvError::BadDimensions);
        }
        if self.window == 0 {
            return Err(PvError::BadWindow);
        }
        if self.epochs == 0 || self.infer_epochs == 0 {
            return Err(PvError::BadEpochs);
        }
        if self.mode == PvMode::PvDm
            && self.combine == Combine::Average
            && self.para_dim != self.word_dim
        {
            return Err(PvError::DimMismatch(self.para_dim, self.word_dim));
        }
        Ok(())
    }

    /// Dimension of the hidden combination h fed to the softmax.
    pub fn hidden_dim(&self) -> usize {
        match (self.mode, self.combine) {
            (PvMode::PvDbow, _) => self.para_dim,
            (PvMode::PvDm, Combine::Average) => self.para_dim,
            (PvMode::PvDm, Combine::Concatenate) => self.para_dim + 2 * self.window * self.word_dim,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Hierarchical-softmax negative log likelihood of `word` given hidden
/// vector `h`. Bit 0 at inner node n contributes sigma(u_n . h + b_n),
/// bit 1 contributes sigma(-(u_n . h + b_n)).
pub fn hs_loss(h: &[f64], word: usize, u: &[Vec<f64>], b: &[f64], tree: &HuffmanTree) -> f64 {
    let mut loss = 0.0;
    for (&node, &bit) in tree.paths[word].iter().zip(&tree.codes[word]) {
        let s: f64 = u[node].iter().zip(h).map(|(a, c)| a * c).sum::<f64>() + b[node];
        let t = if bit == 0 { 1.0 } else { -1.0 };
        loss -= sigmoid(t * s).ln();
    }
    loss
}

/// Probability the tree assigns to `word`; summing over all leaves gives 1.
pub fn leaf_probability(
    h: &[f64],
    word: usize,
    u: &[Vec<f64>],
    b: &[f64],
    tree: &HuffmanTree,
) -> f64 {
    (-hs_loss(h, word, u, b, tree)).exp()
}

/// Analytic gradients of [`hs_loss`].
pub struct HsGrads {
    pub grad_h: Vec<f64>,
    /// One entry per inner node on the path: (node, grad_u_row, grad_b).
    pub node_grads: Vec<(usize, Vec<f64>, f64)>,
}

pub fn hs_grads(h: &[f64], word: usize, u: &[Vec<f64>], b: &[f64], tree: &HuffmanTree) -> HsGrads {
    let mut grad_h = vec![0.0; h.len()];
    let mut node_grads = Vec::with_capacity(tree.paths[word].len());
    for (&node, &bit) in tree.paths[word].iter().zip(&tree.codes[word]) {
        let s: f64 = u[node].iter().zip(h).map(|(a, c)| a * c).sum::<f64>() + b[node];
        let t = if bit == 0 { 1.0 } else { -1.0 };
        // d/ds of -ln sigma(t s) = t (sigma(t s) - 1)
        let ds = t * (sigmoid(t * s) - 1.0);
        for (g, &ui) in grad_h.iter_mut().zip(&u[node]) {
            *g += ds * ui;
        }
        node_grads.push((node, h.iter().map(|&c| ds * c).collect(), ds));
    }
    HsGrads {
        grad_h,
        node_grads,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PvModel {
    pub params: PvParams,
    /// Embedding vocabulary sorted by descending frequency, then term.
    pub vocab: Vec<String>,
    pub word_freq: Vec<u64>,
    pub huffman: HuffmanTree,
    /// Ids of the training documents, aligned with rows of `d`.
    pub doc_ids: Vec<String>,
    /// Paragraph matrix, one row per training document.
    pub d: Vec<Vec<f64>>,
    /// Word matrix, one row per vocabulary word.
    pub w: Vec<Vec<f64>>,
    /// Softmax parameters: one row / bias per Huffman inner node.
    pub u: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// Mean hierarchical-softmax loss per training epoch.
    pub epoch_losses: Vec<f64>,
    /// Documents skipped for having no in-vocabulary tokens.
    pub skipped_docs: usize,
    #[serde(skip)]
    word_index: HashMap<String, usize>,
}

impl PvModel {
    fn rebuild_index(&mut self) {
        self.word_index = self
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn word_index(&self, term: &str) -> Option<usize> {
        self.word_index.get(term).copied()
    }

    /// Token ids of a document, dropping out-of-vocabulary tokens.
    pub fn encode(&self, doc: &TokenizedDoc) -> Vec<usize> {
        doc.tokens
            .iter()
            .filter_map(|t| self.word_index(t))
            .collect()
    }

    pub fn paragraph_vector(&self, doc_id: &str) -> Option<&[f64]> {
        self.doc_ids
            .iter()
            .position(|id| id == doc_id)
            .map(|i| self.d[i].as_slice())
    }
}

fn init_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| (rng.gen::<f64>() - 0.5) / dim as f64).collect()
}

/// Builds h for one position. For PV-DM average, the paragraph vector is
/// included in the mean with the context word vectors. For concatenation,
/// absent boundary slots stay zero.
fn combine_hidden(
    params: &PvParams,
    d_vec: &[f64],
    words: &[usize],
    pos: usize,
    w: &[Vec<f64>],
) -> (Vec<f64>, Vec<(usize, usize)>) {
    // Returns h plus (word, slot) pairs describing which context words
    // contributed and where, for routing gradients back.
    let k = params.window;
    let lo = pos.saturating_sub(k);
    let hi = (pos + k).min(words.len() - 1);
    let mut contributors = Vec::new();
    match (params.mode, params.combine) {
        (PvMode::PvDbow, _) => (d_vec.to_vec(), contributors),
        (PvMode::PvDm, Combine::Average) => {
            let mut h = d_vec.to_vec();
            for t in lo..=hi {
                if t == pos {
                    continue;
                }
                for (hc, &wc) in h.iter_mut().zip(&w[words[t]]) {
                    *hc += wc;
                }
                contributors.push((words[t], 0));
            }
            let scale = 1.0 / (1.0 + contributors.len() as f64);
            for hc in h.iter_mut() {
                *hc *= scale;
            }
            (h, contributors)
        }
        (PvMode::PvDm, Combine::Concatenate) => {
            let p = params.para_dim;
            let q = params.word_dim;
            let mut h = vec![0.0; params.hidden_dim()];
            h[..p].copy_from_slice(d_vec);
            for t in lo..=hi {
                if t == pos {
                    continue;
                }
                // slot index is the signed offset shifted into 0..2k
                let offset = t as isize - pos as isize;
                let slot = if offset < 0 {
                    (offset + k as isize) as usize
                } else {
                    (offset + k as isize - 1) as usize
                };
                let start = p + slot * q;
                h[start..start + q].copy_from_slice(&w[words[t]]);
                contributors.push((words[t], slot));
            }
            (h, contributors)
        }
    }
}

struct Sgd {
    step: usize,
    total: usize,
    lr0: f64,
}

impl Sgd {
    fn lr(&mut self) -> f64 {
        let frac = self.step as f64 / self.total.max(1) as f64;
        self.step += 1;
        (self.lr0 * (1.0 - frac)).max(MIN_LEARNING_RATE)
    }
}

/// One SGD step at (doc position); updates d_vec, and optionally w/u/b.
/// Returns the position loss.
#[allow(clippy::too_many_arguments)]
fn train_position(
    params: &PvParams,
    d_vec: &mut [f64],
    words: &[usize],
    pos: usize,
    w: &mut [Vec<f64>],
    u: &mut [Vec<f64>],
    b: &mut [f64],
    tree: &HuffmanTree,
    lr: f64,
    freeze_model: bool,
) -> f64 {
    let (h, contributors) = combine_hidden(params, d_vec, words, pos, w);
    let center = words[pos];
    let loss = hs_loss(&h, center, u, b, tree);
    let grads = hs_grads(&h, center, u, b, tree);

    if !freeze_model {
        for (node, gu, gb) in &grads.node_grads {
            for (uc, g) in u[*node].iter_mut().zip(gu) {
                *uc -= lr * g;
            }
            b[*node] -= lr * gb;
        }
    }
    match (params.mode, params.combine) {
        (PvMode::PvDbow, _) => {
            for (dc, g) in d_vec.iter_mut().zip(&grads.grad_h) {
                *dc -= lr * g;
            }
        }
        (PvMode::PvDm, Combine::Average) => {
            let scale = 1.0 / (1.0 + contributors.len() as f64);
            for (dc, g) in d_vec.iter_mut().zip(&grads.grad_h) {
                *dc -= lr * g * scale;
            }
            if !freeze_model {
                for (word, _) in &contributors {
                    for (wc, g) in w[*word].iter_mut().zip(&grads.grad_h) {
                        *wc -= lr * g * scale;
                    }
                }
            }
        }
        (PvMode::PvDm, Combine::Concatenate) => {
            let p = params.para_dim;
            let q = params.word_dim;
            for (dc, g) in d_vec.iter_mut().zip(&grads.grad_h[..p]) {
                *dc -= lr * g;
            }
            if !freeze_model {
                for (word, slot) in &contributors {
                    let start = p + slot * q;
                    for (wc, g) in w[*word].iter_mut().zip(&grads.grad_h[start..start + q]) {
                        *wc -= lr * g;
                    }
                }
            }
        }
    }
    loss
}

/// Trains a Paragraph Vector model over the tokenized documents.
/// Documents with no in-vocabulary tokens are skipped and counted.
pub fn train_pv(docs: &[TokenizedDoc], params: PvParams) -> Result<PvModel, PvError> {
    params.validate()?;

    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for tok in &doc.tokens {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= params.min_count)
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if vocab.is_empty() {
        return Err(PvError::EmptyVocabulary);
    }
    let word_freq: Vec<u64> = vocab.iter().map(|&(_, c)| c).collect();
    let huffman = HuffmanTree::build(&word_freq)?;

    let mut model = PvModel {
        params,
        vocab: vocab.iter().map(|&(t, _)| t.to_string()).collect(),
        word_freq,
        huffman,
        doc_ids: Vec::new(),
        d: Vec::new(),
        w: Vec::new(),
        u: Vec::new(),
        b: Vec::new(),
        epoch_losses: Vec::new(),
        skipped_docs: 0,
        word_index: HashMap::new(),
    };
    model.rebuild_index();

    let mut encoded: Vec<Vec<usize>> = Vec::new();
    for doc in docs {
        let ids = model.encode(doc);
        if ids.is_empty() {
            model.skipped_docs += 1;
            continue;
        }
        model.doc_ids.push(doc.id.clone());
        encoded.push(ids);
    }
    if encoded.is_empty() {
        return Err(PvError::EmptyVocabulary);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    model.d = (0..encoded.len())
        .map(|_| init_vector(&mut rng, params.para_dim))
        .collect();
    model.w = (0..model.vocab.len())
        .map(|_| init_vector(&mut rng, params.word_dim))
        .collect();
    model.u = vec![vec![0.0; params.hidden_dim()]; model.huffman.inner_count];
    model.b = vec![0.0; model.huffman.inner_count];

    let positions: usize = encoded.iter().map(Vec::len).sum();
    let mut sgd = Sgd {
        step: 0,
        total: params.epochs * positions,
        lr0: params.learning_rate,
    };
    for _ in 0..params.epochs {
        let mut epoch_loss = 0.0;
        for (di, words) in encoded.iter().enumerate() {
            for pos in 0..words.len() {
                let lr = sgd.lr();
                epoch_loss += train_position(
                    &params,
                    &mut model.d[di],
                    words,
                    pos,
                    &mut model.w,
                    &mut model.u,
                    &mut model.b,
                    &model.huffman,
                    lr,
                    false,
                );
            }
        }
        model.epoch_losses.push(epoch_loss / positions as f64);
    }
    Ok(model)
}

/// Infers a paragraph vector for a new document by gradient descent with
/// `w`, `u`, `b` held fixed.
pub fn infer_vector(
    model: &PvModel,
    doc: &TokenizedDoc,
    infer_epochs: usize,
    seed: u64,
) -> Result<Vec<f64>, PvError> {
    if infer_epochs == 0 {
        return Err(PvError::BadEpochs);
    }
    let words = model.encode(doc);
    if words.is_empty() {
        return Err(PvError::NoKnownTokens(doc.id.clone()));
    }
    let params = model.params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d_vec = init_vector(&mut rng, params.para_dim);
    // w/u/b are frozen; clones keep the borrow checker happy without
    // touching the model.
    let mut w = model.w.clone();
    let mut u = model.u.clone();
    let mut b = model.b.clone();
    // Inference adapts a single fresh vector against an already-converged
    // model whose softmax weights have grown large; the full training rate
    // overshoots along the first gradient direction, so use a much smaller
    // step.
    let mut sgd = Sgd {
        step: 0,
        total: infer_epochs * words.len(),
        lr0: params.learning_rate * INFER_LR_SCALE,
    };
    for _ in 0..infer_epochs {
        for pos in 0..words.len() {
            let lr = sgd.lr();
            train_position(
                &params, &mut d_vec, &words, pos, &mut w, &mut u, &mut b, &model.huffman, lr,
                true,
            );
        }
    }
    Ok(d_vec)
}

/// Mean paragraph vector of a cluster's training members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub category_index: usize,
    pub centroid: Vec<f64>,
    pub member_count: usize,
}

/// Builds one summary per category that has at least one member with a
/// trained paragraph vector.
pub fn cluster_summaries(model: &PvModel, assignments: &[Assignment]) -> Vec<ClusterSummary> {
    let index: HashMap<&str, usize> = model
        .doc_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let n_categories = assignments
        .iter()
        .map(|a| a.category_index + 1)
        .max()
        .unwrap_or(0);
    let mut sums: Vec<(Vec<f64>, usize)> =
        vec![(vec![0.0; model.params.para_dim], 0); n_categories];
    for a in assignments {
        if let Some(&i) = index.get(a.doc_id.as_str()) {
            let (sum, count) = &mut sums[a.category_index];
            for (s, &v) in sum.iter_mut().zip(&model.d[i]) {
                *s += v;
            }
            *count += 1;
        }
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, (_, count))| *count > 0)
        .map(|(category_index, (mut sum, count))| {
            for s in sum.iter_mut() {
                *s /= count as f64;
            }
            ClusterSummary {
                category_index,
                centroid: sum,
                member_count: count,
            }
        })
        .collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Ranks clusters by cosine similarity between the inferred vector of
/// `test_doc` and each cluster centroid, descending; ties break toward the
/// smaller category index.
pub fn classify(
    model: &PvModel,
    summaries: &[ClusterSummary],
    test_doc: &TokenizedDoc,
    seed: u64,
) -> Result<Vec<(usize, f64)>, PvError> {
    if summaries.is_empty() {
        return Err(PvError::NoSummaries);
    }
    let vector = infer_vector(model, test_doc, model.params.infer_epochs, seed)?;
    rank_against(&vector, summaries)
}

/// Ranking half of [`classify`], usable with a precomputed vector.
pub fn rank_against(
    vector: &[f64],
    summaries: &[ClusterSummary],
) -> Result<Vec<(usize, f64)>, PvError> {
    if summaries.is_empty() {
        return Err(PvError::NoSummaries);
    }
    let mut ranked: Vec<(usize, f64)> = summaries
        .iter()
        .map(|s| (s.category_index, cosine(vector, &s.centroid)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(ranked)
}

pub fn save_model(model: &PvModel, path: &Path) -> Result<(), PvError> {
    let json = serde_json::to_string(model).expect("pv model serializes");
    fs::write(path, json).map_err(|e| PvError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_model(path: &Path) -> Result<PvModel, PvError> {
    let text = fs::read_to_string(path).map_err(|e| PvError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut model: PvModel = serde_json::from_str(&text).map_err(|e| PvError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    model.rebuild_index();
    Ok(model)
}
