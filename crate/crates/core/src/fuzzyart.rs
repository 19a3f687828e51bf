//! Fuzzy ART clustering engine.
//!
//! Inputs are analog vectors in [0,1]^M, preprocessed by complement coding
//! (default) or L1 normalization. Category choice uses
//! `T_j = |I ∧ w_j| / (alpha + |w_j|)`, resonance requires
//! `|I ∧ w_j| / |I| >= rho`, and learning follows
//! `w_new = beta (I ∧ w_old) + (1 - beta) w_old`, with beta forced to 1 on a
//! category's first commitment when fast commit is enabled. Committed
//! weights are componentwise non-increasing for the life of the model.
//!
//! Training is order-sensitive; documents are presented in corpus order and
//! epochs repeat until the assignment vector stops changing.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::vectorizer::DocVector;

#[derive(Debug, thiserror::Error)]
pub enum FuzzyArtError {
    #[error("alpha must be > 0, got {0}")]
    BadAlpha(f64),
    #[error("beta must be in [0,1], got {0}")]
    BadBeta(f64),
    #[error("rho must be in [0,1], got {0}")]
    BadRho(f64),
    #[error("max_epochs must be >= 1")]
    BadEpochs,
    #[error("input component {value} at index {index} outside [0,1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("cannot L1-normalize a zero vector")]
    ZeroVector,
    #[error("vector length {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input collection")]
    EmptyInput,
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
pub enum InputMode {
    ComplementCoding,
    L1Normalization,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FuzzyArtParams {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub fast_commit: bool,
    pub max_epochs: usize,
    pub input_mode: InputMode,
}

impl Default for FuzzyArtParams {
    fn default() -> Self {
        FuzzyArtParams {
            alpha: 0.2,
            beta: 0.4,
            rho: 0.8,
            fast_commit: true,
            max_epochs: 50,
            input_mode: InputMode::ComplementCoding,
        }
    }
}

impl FuzzyArtParams {
    pub fn validate(&self) -> Result<(), FuzzyArtError> {
        if self.alpha <= 0.0 || self.alpha.is_nan() {
            return Err(FuzzyArtError::BadAlpha(self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(FuzzyArtError::BadBeta(self.beta));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(FuzzyArtError::BadRho(self.rho));
        }
        if self.max_epochs == 0 {
            return Err(FuzzyArtError::BadEpochs);
        }
        Ok(())
    }
}

/// One resonated presentation: the winning category index together with its
/// choice and match values at assignment time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub doc_id: String,
    pub category_index: usize,
    pub choice_value: f64,
    pub match_value: f64,
}

/// Complement coding: `I = (a, 1 - a)`, so `|I| = M` exactly.
pub fn complement_code(a: &[f64]) -> Result<Vec<f64>, FuzzyArtError> {
    for (i, &v) in a.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(FuzzyArtError::OutOfRange { index: i, value: v });
        }
    }
    let mut coded = Vec::with_capacity(2 * a.len());
    coded.extend_from_slice(a);
    coded.extend(a.iter().map(|&v| 1.0 - v));
    Ok(coded)
}

/// L1 normalization: `I = a / |a|`.
pub fn l1_normalize(a: &[f64]) -> Result<Vec<f64>, FuzzyArtError> {
    let norm = norm_l1(a);
    if norm <= 0.0 {
        return Err(FuzzyArtError::ZeroVector);
    }
    Ok(a.iter().map(|&v| v / norm).collect())
}

/// Componentwise minimum (fuzzy AND).
pub fn fuzzy_min(x: &[f64], y: &[f64]) -> Result<Vec<f64>, FuzzyArtError> {
    if x.len() != y.len() {
        return Err(FuzzyArtError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| a.min(b)).collect())
}

/// L1 norm: sum of components.
pub fn norm_l1(x: &[f64]) -> f64 {
    x.iter().sum()
}

fn min_norm(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| a.min(b)).sum()
}

/// Choice function `T = |I ∧ w| / (alpha + |w|)`.
pub fn choice(input: &[f64], weights: &[f64], alpha: f64) -> Result<f64, FuzzyArtError> {
    if input.len() != weights.len() {
        return Err(FuzzyArtError::DimensionMismatch {
            expected: input.len(),
            got: weights.len(),
        });
    }
    Ok(min_norm(input, weights) / (alpha + norm_l1(weights)))
}

/// Match function `m = |I ∧ w| / |I|`.
pub fn match_ratio(input: &[f64], weights: &[f64]) -> Result<f64, FuzzyArtError> {
    if input.len() != weights.len() {
        return Err(FuzzyArtError::DimensionMismatch {
            expected: input.len(),
            got: weights.len(),
        });
    }
    Ok(min_norm(input, weights) / norm_l1(input))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzyArtModel {
    /// Dimension M of the raw (uncoded) input.
    pub input_dim: usize,
    pub params: FuzzyArtParams,
    /// Committed category weight vectors in creation order; the index is
    /// the cluster id and is never permuted.
    pub categories: Vec<Vec<f64>>,
}

impl FuzzyArtModel {
    pub fn new(input_dim: usize, params: FuzzyArtParams) -> Result<Self, FuzzyArtError> {
        params.validate()?;
        Ok(FuzzyArtModel {
            input_dim,
            params,
            categories: Vec::new(),
        })
    }

    /// Dimension of coded inputs and weight vectors.
    pub fn coded_dim(&self) -> usize {
        match self.params.input_mode {
            InputMode::ComplementCoding => 2 * self.input_dim,
            InputMode::L1Normalization => self.input_dim,
        }
    }

    /// Applies the configured input preprocessing.
    pub fn code_input(&self, a: &[f64]) -> Result<Vec<f64>, FuzzyArtError> {
        if a.len() != self.input_dim {
            return Err(FuzzyArtError::DimensionMismatch {
                expected: self.input_dim,
                got: a.len(),
            });
        }
        match self.params.input_mode {
            InputMode::ComplementCoding => complement_code(a),
            InputMode::L1Normalization => l1_normalize(a),
        }
    }

    /// Presents one coded input: runs the choice/vigilance search until
    /// resonance and, when `learn` is set, updates the winner's weights
    /// (committing a new category when the uncommitted node wins).
    ///
    /// The uncommitted node is virtual: it always participates with
    /// `T = |I| / (alpha + coded_dim)` and `m = 1`, and is materialized only
    /// when it wins, so the search always terminates.
    pub fn present(
        &mut self,
        doc_id: &str,
        input: &[f64],
        learn: bool,
    ) -> Result<Assignment, FuzzyArtError> {
        let coded_dim = self.coded_dim();
        if input.len() != coded_dim {
            return Err(FuzzyArtError::DimensionMismatch {
                expected: coded_dim,
                got: input.len(),
            });
        }
        let alpha = self.params.alpha;
        let rho = self.params.rho;
        let input_norm = norm_l1(input);

        // T_j for committed categories; disqualified nodes are held at -1
        // for the duration of this presentation.
        let mut scores: Vec<f64> = self
            .categories
            .iter()
            .map(|w| min_norm(input, w) / (alpha + norm_l1(w)))
            .collect();
        let uncommitted_score = input_norm / (alpha + coded_dim as f64);

        loop {
            // argmax over committed nodes, smallest index on ties
            let mut best: Option<(usize, f64)> = None;
            for (j, &t) in scores.iter().enumerate() {
                if t >= 0.0 && best.is_none_or(|(_, bt)| t > bt) {
                    best = Some((j, t));
                }
            }
            match best {
                // Committed winner must strictly beat the uncommitted node
                // or tie it; commitment order gives committed nodes the
                // smaller indices, so ties go to them.
                Some((j, t)) if t >= uncommitted_score => {
                    let m = min_norm(input, &self.categories[j]) / input_norm;
                    if m >= rho {
                        if learn {
                            self.learn(j, input, false);
                        }
                        return Ok(Assignment {
                            doc_id: doc_id.to_string(),
                            category_index: j,
                            choice_value: t,
                            match_value: m,
                        });
                    }
                    scores[j] = -1.0;
                }
                _ => {
                    // Uncommitted node wins; it always resonates (w = 1s).
                    let j = self.categories.len();
                    if learn {
                        self.categories.push(vec![1.0; coded_dim]);
                        self.learn(j, input, true);
                    }
                    return Ok(Assignment {
                        doc_id: doc_id.to_string(),
                        category_index: j,
                        choice_value: uncommitted_score,
                        match_value: 1.0,
                    });
                }
            }
        }
    }

    fn learn(&mut self, j: usize, input: &[f64], first_commit: bool) {
        let beta = if first_commit && self.params.fast_commit {
            1.0
        } else {
            self.params.beta
        };
        // Algebraically beta*(i ∧ w) + (1-beta)*w, written as a subtraction
        // of a non-negative term so rounding can never push a weight up.
        // beta = 1 short-circuits to the exact fuzzy minimum.
        for (w, &i) in self.categories[j].iter_mut().zip(input) {
            if beta == 1.0 {
                *w = i.min(*w);
            } else {
                *w -= beta * (*w - i.min(*w));
            }
        }
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }
}

/// Trains a Fuzzy ART model over the document vectors, presenting them in
/// collection order and repeating epochs until the assignment vector is
/// unchanged between two consecutive epochs or `max_epochs` is reached.
/// Returns the model and the last epoch's assignments.
pub fn train(
    vectors: &[DocVector],
    params: FuzzyArtParams,
) -> Result<(FuzzyArtModel, Vec<Assignment>), FuzzyArtError> {
    params.validate()?;
    let first = vectors.first().ok_or(FuzzyArtError::EmptyInput)?;
    let mut model = FuzzyArtModel::new(first.values.len(), params)?;
    let coded: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| model.code_input(&v.values))
        .collect::<Result<_, _>>()?;

    let mut previous: Option<Vec<usize>> = None;
    let mut assignments = Vec::new();
    for _ in 0..params.max_epochs {
        assignments.clear();
        for (vec, input) in vectors.iter().zip(&coded) {
            assignments.push(model.present(&vec.doc_id, input, true)?);
        }
        let current: Vec<usize> = assignments.iter().map(|a| a.category_index).collect();
        if previous.as_ref() == Some(&current) {
            break;
        }
        previous = Some(current);
    }
    Ok((model, assignments))
}

/// Groups assignments per category: index k holds the doc ids of cluster k.
pub fn cluster_members(assignments: &[Assignment], n_categories: usize) -> Vec<Vec<String>> {
    let mut clusters = vec![Vec::new(); n_categories];
    for a in assignments {
        clusters[a.category_index].push(a.doc_id.clone());
    }
    clusters
}

/// Model persisted as JSON with full f64 precision.
pub fn save_model(model: &FuzzyArtModel, path: &Path) -> Result<(), FuzzyArtError> {
    let json = serde_json::to_string_pretty(model).expect("model serializes");
    fs::write(path, json).map_err(|e| FuzzyArtError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_model(path: &Path) -> Result<FuzzyArtModel, FuzzyArtError> {
    let text = fs::read_to_string(path).map_err(|e| FuzzyArtError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| FuzzyArtError::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Assignments persisted as CSV `doc_id,category,choice,match`.
pub fn save_assignments(assignments: &[Assignment], path: &Path) -> Result<(), FuzzyArtError> {
    let mut out = fs::File::create(path).map_err(|e| FuzzyArtError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let write = |out: &mut fs::File, s: String| {
        writeln!(out, "{s}").map_err(|e| FuzzyArtError::Io {
            path: path.display().to_string(),
            source: e,
        })
    };
    write(&mut out, "doc_id,category,choice,match".to_string())?;
    for a in assignments {
        write(
            &mut out,
            format!(
                "{},{},{:.16e},{:.16e}",
                a.doc_id, a.category_index, a.choice_value, a.match_value
            ),
        )?;
    }
    Ok(())
}

pub fn load_assignments(path: &Path) -> Result<Vec<Assignment>, FuzzyArtError> {
    let text = fs::read_to_string(path).map_err(|e| FuzzyArtError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut assignments = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse_err = |message: String| FuzzyArtError::Format {
            path: path.display().to_string(),
            message: format!("line {}: {message}", i + 1),
        };
        if fields.len() != 4 {
            return Err(parse_err("expected 4 fields".into()));
        }
        assignments.push(Assignment {
            doc_id: fields[0].to_string(),
            category_index: fields[1].parse().map_err(|e| parse_err(format!("{e}")))?,
            choice_value: fields[2].parse().map_err(|e| parse_err(format!("{e}")))?,
            match_value: fields[3].parse().map_err(|e| parse_err(format!("{e}")))?,
        });
    }
    Ok(assignments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(id: &str, values: &[f64]) -> DocVector {
        DocVector {
            doc_id: id.into(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn complement_coding_examples() {
        assert_eq!(
            complement_code(&[0.2, 0.7]).unwrap(),
            vec![0.2, 0.7, 1.0 - 0.2, 1.0 - 0.7]
        );
        let coded = complement_code(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(coded, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(norm_l1(&coded), 3.0);
        assert_eq!(complement_code(&[1.0]).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(
            complement_code(&[1.2]),
            Err(FuzzyArtError::OutOfRange { .. })
        ));
    }

    #[test]
    fn l1_normalization_examples() {
        assert_eq!(l1_normalize(&[1.0, 3.0]).unwrap(), vec![0.25, 0.75]);
        assert_eq!(l1_normalize(&[2.0]).unwrap(), vec![1.0]);
        assert!(matches!(
            l1_normalize(&[0.0, 0.0]),
            Err(FuzzyArtError::ZeroVector)
        ));
    }

    #[test]
    fn fuzzy_min_examples() {
        let x = vec![0.2, 0.8];
        let y = vec![0.5, 0.3];
        assert_eq!(fuzzy_min(&x, &y).unwrap(), vec![0.2, 0.3]);
        assert_eq!(fuzzy_min(&x, &x).unwrap(), x);
        assert_eq!(fuzzy_min(&x, &[1.0, 1.0]).unwrap(), x);
        assert!(matches!(
            fuzzy_min(&x, &[1.0]),
            Err(FuzzyArtError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn choice_function_examples() {
        // uncommitted node, M = 2, alpha = 0.2: T = 2 / 4.2
        let input = complement_code(&[0.3, 0.6]).unwrap();
        let uncommitted = vec![1.0; 4];
        let t = choice(&input, &uncommitted, 0.2).unwrap();
        assert!((t - 2.0 / 4.2).abs() < 1e-15);
        // w = I: maximal self-choice
        let t = choice(&input, &input, 0.2).unwrap();
        assert!((t - 2.0 / 2.2).abs() < 1e-15);
        // disjoint supports
        assert_eq!(choice(&[1.0, 0.0], &[0.0, 1.0], 0.2).unwrap(), 0.0);
    }

    #[test]
    fn match_function_examples() {
        let input = complement_code(&[0.3, 0.6]).unwrap();
        assert_eq!(match_ratio(&input, &[1.0; 4]).unwrap(), 1.0);
        assert_eq!(match_ratio(&input, &input).unwrap(), 1.0);
        // M = 1, I = [0.4, 0.6], w = [0.2, 0.2] -> 0.4 / 1
        let m = match_ratio(&[0.4, 0.6], &[0.2, 0.2]).unwrap();
        assert!((m - 0.4).abs() < 1e-15);
    }

    #[test]
    fn empty_model_commits_first_input_exactly() {
        let mut model = FuzzyArtModel::new(2, FuzzyArtParams::default()).unwrap();
        let input = model.code_input(&[0.2, 0.7]).unwrap();
        let a = model.present("d0", &input, true).unwrap();
        assert_eq!(a.category_index, 0);
        assert_eq!(a.match_value, 1.0);
        // fast commit: w = I exactly
        assert_eq!(model.categories[0], input);
    }

    #[test]
    fn represented_input_reaches_same_category_unchanged() {
        let params = FuzzyArtParams {
            beta: 1.0,
            ..Default::default()
        };
        let mut model = FuzzyArtModel::new(2, params).unwrap();
        let input = model.code_input(&[0.2, 0.7]).unwrap();
        model.present("d0", &input, true).unwrap();
        let w = model.categories[0].clone();
        let a = model.present("d0", &input, true).unwrap();
        assert_eq!(a.category_index, 0);
        assert_eq!(model.categories[0], w);
        assert_eq!(model.category_count(), 1);
    }

    #[test]
    fn maximal_vigilance_separates_distinct_inputs() {
        let params = FuzzyArtParams {
            beta: 1.0,
            rho: 1.0,
            ..Default::default()
        };
        let (model, assignments) = train(
            &[dv("a", &[0.2, 0.7]), dv("b", &[0.4, 0.1])],
            params,
        )
        .unwrap();
        assert_eq!(model.category_count(), 2);
        assert_ne!(assignments[0].category_index, assignments[1].category_index);
    }

    #[test]
    fn identical_documents_share_one_category() {
        let docs: Vec<DocVector> = (0..5).map(|i| dv(&format!("d{i}"), &[0.3, 0.6])).collect();
        let (model, assignments) = train(&docs, FuzzyArtParams::default()).unwrap();
        assert_eq!(model.category_count(), 1);
        assert!(assignments.iter().all(|a| a.category_index == 0));
    }

    #[test]
    fn single_document_single_category() {
        let (model, assignments) = train(&[dv("d", &[0.5])], FuzzyArtParams::default()).unwrap();
        assert_eq!(model.category_count(), 1);
        assert_eq!(assignments.len(), 1);
    }

    #[test]
    fn tie_break_selects_smallest_index() {
        // Two identical committed categories produce equal scores; the
        // search must pick index 0.
        let mut model = FuzzyArtModel::new(1, FuzzyArtParams::default()).unwrap();
        let w = complement_code(&[0.5]).unwrap();
        model.categories.push(w.clone());
        model.categories.push(w.clone());
        let a = model.present("d", &w, false).unwrap();
        assert_eq!(a.category_index, 0);
    }

    #[test]
    fn vigilance_reset_disqualifies_and_search_terminates() {
        // Category 0 wins choice but fails vigilance; category 1 resonates.
        let params = FuzzyArtParams {
            rho: 0.85,
            beta: 1.0,
            ..Default::default()
        };
        let mut model = FuzzyArtModel::new(1, params).unwrap();
        // category 0: high overlap ratio per unit norm, but too little of I
        // category 1: covers I well but carries extra mass, lowering T
        model.categories.push(vec![0.6, 0.2]);
        model.categories.push(vec![1.0, 0.4]);
        let input = complement_code(&[0.5]).unwrap(); // [0.5, 0.5]
        let t0 = choice(&input, &model.categories[0], params.alpha).unwrap();
        let t1 = choice(&input, &model.categories[1], params.alpha).unwrap();
        assert!(t0 > t1, "construction: category 0 must win choice first");
        assert!(match_ratio(&input, &model.categories[0]).unwrap() < params.rho);
        let a = model.present("d", &input, false).unwrap();
        assert_eq!(a.category_index, 1);
        assert!(a.match_value >= params.rho);
    }

    #[test]
    fn empty_collection_rejected() {
        assert!(matches!(
            train(&[], FuzzyArtParams::default()),
            Err(FuzzyArtError::EmptyInput)
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        for params in [
            FuzzyArtParams {
                alpha: 0.0,
                ..Default::default()
            },
            FuzzyArtParams {
                beta: 1.5,
                ..Default::default()
            },
            FuzzyArtParams {
                rho: -0.1,
                ..Default::default()
            },
            FuzzyArtParams {
                max_epochs: 0,
                ..Default::default()
            },
        ] {
            assert!(params.validate().is_err());
        }
    }

    #[test]
    fn model_json_round_trip() {
        let (model, assignments) =
            train(&[dv("a", &[0.1, 0.9]), dv("b", &[0.8, 0.2])], FuzzyArtParams::default())
                .unwrap();
        let dir = tempfile::TempDir::new().unwrap();
        let mpath = dir.path().join("model.json");
        save_model(&model, &mpath).unwrap();
        let back = load_model(&mpath).unwrap();
        assert_eq!(back.categories, model.categories);
        assert_eq!(back.input_dim, model.input_dim);

        let apath = dir.path().join("assignments.csv");
        save_assignments(&assignments, &apath).unwrap();
        let back = load_assignments(&apath).unwrap();
        assert_eq!(back, assignments);
    }
}
