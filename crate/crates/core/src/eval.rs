//! Scoring: cluster-to-label mapping, precision/recall/F-measure, the
//! vigilance sweep, and a cosine-kNN baseline.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::fuzzyart::{self, Assignment, FuzzyArtError, FuzzyArtParams};
use crate::pvec::cosine;
use crate::vectorizer::DocVector;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("predicted and gold label sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("assignment for {0} has no gold label")]
    MissingLabel(String),
    #[error("rho grid is empty")]
    EmptyGrid,
    #[error("rho grid must be ascending within [0,1]")]
    BadGrid,
    #[error("empty training set")]
    EmptyTraining,
    #[error("k must be in 1..={0}, got {1}")]
    BadK(usize, usize),
    #[error(transparent)]
    FuzzyArt(#[from] FuzzyArtError),
}

/// Majority-label mapping from cluster index to gold label. Several
/// clusters may map to the same label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabelMap {
    pub mapping: BTreeMap<usize, String>,
    /// Fraction of the mapped training documents (1.0 unless clusters were
    /// dropped for having no labeled members).
    pub coverage: f64,
}

impl ClusterLabelMap {
    pub fn label_for(&self, category: usize) -> Option<&str> {
        self.mapping.get(&category).map(String::as_str)
    }
}

/// Maps each cluster with at least one member to its majority gold label,
/// ties broken by lexicographic label order.
pub fn map_clusters_majority(
    assignments: &[Assignment],
    gold: &HashMap<String, String>,
) -> Result<ClusterLabelMap, EvalError> {
    let mut votes: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    let mut counted = 0usize;
    for a in assignments {
        let label = gold
            .get(&a.doc_id)
            .ok_or_else(|| EvalError::MissingLabel(a.doc_id.clone()))?;
        *votes
            .entry(a.category_index)
            .or_default()
            .entry(label)
            .or_insert(0) += 1;
        counted += 1;
    }
    let mapping: BTreeMap<usize, String> = votes
        .into_iter()
        .map(|(category, tally)| {
            // max count; BTreeMap iteration order makes the lexicographically
            // smallest label win ties
            let best = tally
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(l, _)| l.to_string())
                .expect("cluster has at least one vote");
            (category, best)
        })
        .collect();
    let coverage = if assignments.is_empty() {
        0.0
    } else {
        counted as f64 / assignments.len() as f64
    };
    Ok(ClusterLabelMap { mapping, coverage })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_label: BTreeMap<String, LabelScores>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f: f64,
    /// counts[gold label][predicted label]
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
}

/// F = 2PR / (P + R), with the 0/0 -> 0 convention.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Per-label and macro-averaged precision/recall/F over aligned sequences.
/// Macro averages run over the labels present in gold.
pub fn prf(predicted: &[String], gold: &[String]) -> Result<EvalReport, EvalError> {
    if predicted.len() != gold.len() {
        return Err(EvalError::LengthMismatch(predicted.len(), gold.len()));
    }
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (p, g) in predicted.iter().zip(gold) {
        *counts
            .entry(g.clone())
            .or_default()
            .entry(p.clone())
            .or_insert(0) += 1;
    }
    let gold_labels: Vec<&String> = counts.keys().collect();
    let mut per_label = BTreeMap::new();
    let mut correct_total = 0usize;
    for label in &gold_labels {
        let tp = counts[*label].get(*label).copied().unwrap_or(0);
        correct_total += tp;
        let retrieved = predicted.iter().filter(|p| p == label).count();
        let relevant: usize = counts[*label].values().sum();
        let precision = if retrieved == 0 {
            0.0
        } else {
            tp as f64 / retrieved as f64
        };
        let recall = if relevant == 0 {
            0.0
        } else {
            tp as f64 / relevant as f64
        };
        per_label.insert(
            (*label).clone(),
            LabelScores {
                precision,
                recall,
                f_measure: f_measure(precision, recall),
                support: relevant,
            },
        );
    }
    let n_labels = per_label.len().max(1) as f64;
    let macro_precision = per_label.values().map(|s| s.precision).sum::<f64>() / n_labels;
    let macro_recall = per_label.values().map(|s| s.recall).sum::<f64>() / n_labels;
    let macro_f = per_label.values().map(|s| s.f_measure).sum::<f64>() / n_labels;
    // single-label task: micro precision = micro recall = accuracy
    let micro = if gold.is_empty() {
        0.0
    } else {
        correct_total as f64 / gold.len() as f64
    };
    Ok(EvalReport {
        per_label,
        macro_precision,
        macro_recall,
        macro_f,
        micro_precision: micro,
        micro_recall: micro,
        micro_f: micro,
        counts,
    })
}

/// Trains a fresh Fuzzy ART model per vigilance value and reports the
/// resulting category counts.
pub fn vigilance_sweep(
    vectors: &[DocVector],
    params: FuzzyArtParams,
    rho_grid: &[f64],
) -> Result<Vec<(f64, usize)>, EvalError> {
    if rho_grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let ascending = rho_grid.windows(2).all(|w| w[0] <= w[1]);
    if !ascending || rho_grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(EvalError::BadGrid);
    }
    let mut table = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let (model, _) = fuzzyart::train(vectors, FuzzyArtParams { rho, ..params })?;
        table.push((rho, model.category_count()));
    }
    Ok(table)
}

/// Majority label among the k nearest training vectors by cosine
/// similarity. Label ties break toward the smaller summed cosine distance,
/// then lexicographically.
pub fn knn_predict(
    train: &[(DocVector, String)],
    test: &[f64],
    k: usize,
) -> Result<String, EvalError> {
    if train.is_empty() {
        return Err(EvalError::EmptyTraining);
    }
    if k == 0 || k > train.len() {
        return Err(EvalError::BadK(train.len(), k));
    }
    let mut scored: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, (v, _))| (cosine(&v.values, test), i))
        .collect();
    // descending similarity; equal similarities keep index order
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for &(sim, i) in scored.iter().take(k) {
        let entry = tally.entry(train[i].1.as_str()).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += 1.0 - sim;
    }
    let best = tally
        .iter()
        .max_by(|a, b| {
            (a.1 .0)
                .cmp(&b.1 .0)
                .then_with(|| b.1 .1.partial_cmp(&a.1 .1).unwrap())
                .then_with(|| b.0.cmp(a.0))
        })
        .map(|(l, _)| l.to_string())
        .expect("k >= 1");
    Ok(best)
}
