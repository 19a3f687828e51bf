//! Pipeline stage implementations shared by the individual subcommands and
//! `pipeline`. Every stage reads and writes plain files so intermediate
//! artifacts can be inspected and diffed.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;

use clusart_core::corpus::{
    load_manifest, load_newsgroups_dir, load_newsgroups_predefined, save_manifest, split_corpus,
    Corpus, Split, SplitStrategy,
};
use clusart_core::eval::{self, map_clusters_majority, prf, EvalReport};
use clusart_core::fuzzyart::{self, Assignment, FuzzyArtParams};
use clusart_core::pvec::{self, Combine, PvMode, PvParams};
use clusart_core::textprep::{self, preprocess_document, Stoplist, TokenizedDoc};
use clusart_core::vectorizer::{
    self, apply_scaling, build_vocabulary, fit_scaling, tfidf_vector, DocVector,
};

use crate::config::RunConfig;

pub fn ingest(cfg: &RunConfig, out_manifest: &Path) -> anyhow::Result<Corpus> {
    let input = cfg
        .input
        .as_ref()
        .context("ingest requires --input")?;
    let strip = !cfg.keep_headers;
    let corpus = match cfg.layout.as_str() {
        "predefined" => {
            let c = load_newsgroups_predefined(input, strip)?;
            split_corpus(&c, SplitStrategy::Predefined)?
        }
        "flat" => {
            let c = load_newsgroups_dir(input, strip)?;
            split_corpus(
                &c,
                SplitStrategy::Random {
                    ratio: cfg.split_ratio,
                    seed: cfg.seed,
                },
            )?
        }
        other => bail!("unknown layout {other:?} (expected flat or predefined)"),
    };
    if corpus.decode_warnings > 0 {
        eprintln!(
            "warning: {} file(s) contained invalid UTF-8; bytes replaced",
            corpus.decode_warnings
        );
    }
    save_manifest(&corpus, out_manifest)?;
    Ok(corpus)
}

pub fn preprocess(cfg: &RunConfig, manifest: &Path, out_tokens: &Path) -> anyhow::Result<()> {
    let corpus = load_manifest(manifest)?;
    let stoplist = match &cfg.stoplist {
        Some(path) => Stoplist::from_file(path)?,
        None => Stoplist::default(),
    };
    let docs: Vec<TokenizedDoc> = corpus
        .documents
        .iter()
        .map(|d| preprocess_document(d, &stoplist))
        .collect();
    textprep::save_tokens(&docs, out_tokens)?;
    Ok(())
}

/// Splits token docs by the manifest's split tags; untagged docs count as
/// training documents.
fn partition_tokens(
    tokens: Vec<TokenizedDoc>,
    corpus: &Corpus,
) -> (Vec<TokenizedDoc>, Vec<TokenizedDoc>) {
    let split_of: HashMap<&str, Option<Split>> = corpus
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d.split))
        .collect();
    tokens
        .into_iter()
        .partition(|t| split_of.get(t.id.as_str()) != Some(&Some(Split::Test)))
}

pub fn vectorize(
    cfg: &RunConfig,
    tokens_path: &Path,
    manifest: &Path,
    out_vocab: &Path,
    out_train: &Path,
    out_test: &Path,
) -> anyhow::Result<()> {
    let corpus = load_manifest(manifest)?;
    let tokens = textprep::load_tokens(tokens_path)?;
    let (train, test) = partition_tokens(tokens, &corpus);
    let mut vocab = build_vocabulary(&train, cfg.vocab_size)?;

    let mut train_vectors: Vec<DocVector> =
        train.iter().map(|d| tfidf_vector(d, &vocab)).collect();
    let maxima = fit_scaling(&mut train_vectors);
    let mut test_vectors: Vec<DocVector> = test.iter().map(|d| tfidf_vector(d, &vocab)).collect();
    for v in test_vectors.iter_mut() {
        apply_scaling(v, &maxima);
    }
    vocab.scaling_maxima = Some(maxima);

    vectorizer::save_vocabulary(&vocab, out_vocab)?;
    vectorizer::save_vectors(&train_vectors, out_train)?;
    vectorizer::save_vectors(&test_vectors, out_test)?;
    Ok(())
}

pub fn art_params(cfg: &RunConfig) -> FuzzyArtParams {
    FuzzyArtParams {
        alpha: cfg.alpha,
        beta: cfg.beta,
        rho: cfg.rho,
        fast_commit: cfg.fast_commit,
        max_epochs: cfg.max_epochs,
        ..Default::default()
    }
}

pub fn train(
    cfg: &RunConfig,
    train_vectors: &Path,
    out_model: &Path,
    out_assignments: &Path,
) -> anyhow::Result<usize> {
    let vectors = vectorizer::load_vectors(train_vectors)?;
    let (model, assignments) = fuzzyart::train(&vectors, art_params(cfg))?;
    fuzzyart::save_model(&model, out_model)?;
    fuzzyart::save_assignments(&assignments, out_assignments)?;
    Ok(model.category_count())
}

pub fn pv_params(cfg: &RunConfig) -> anyhow::Result<PvParams> {
    let mode = match cfg.pv_mode.as_str() {
        "dm" => PvMode::PvDm,
        "dbow" => PvMode::PvDbow,
        other => bail!("unknown pv mode {other:?} (expected dm or dbow)"),
    };
    Ok(PvParams {
        para_dim: cfg.pv_dim,
        word_dim: cfg.pv_dim,
        window: cfg.window,
        learning_rate: cfg.learning_rate,
        epochs: cfg.pv_epochs,
        mode,
        combine: Combine::Average,
        seed: cfg.seed,
        min_count: cfg.min_count,
        infer_epochs: cfg.infer_epochs,
    })
}

/// Test-phase classification: trains a Paragraph Vector model on the
/// training split, summarizes each Fuzzy ART category as the centroid of
/// its members' paragraph vectors, then ranks categories for every test
/// document. Documents with no in-vocabulary tokens fall back to the
/// largest category and are flagged on stderr.
pub fn classify(
    cfg: &RunConfig,
    tokens_path: &Path,
    manifest: &Path,
    assignments_path: &Path,
    out_csv: &Path,
) -> anyhow::Result<()> {
    let corpus = load_manifest(manifest)?;
    let tokens = textprep::load_tokens(tokens_path)?;
    let (train, test) = partition_tokens(tokens, &corpus);
    let assignments = fuzzyart::load_assignments(assignments_path)?;

    let model = pvec::train_pv(&train, pv_params(cfg)?)?;
    if model.skipped_docs > 0 {
        eprintln!(
            "warning: {} training document(s) had no in-vocabulary tokens and were skipped",
            model.skipped_docs
        );
    }
    let summaries = pvec::cluster_summaries(&model, &assignments);
    if summaries.is_empty() {
        bail!("no cluster centroids could be built from the assignments");
    }
    let largest = summaries
        .iter()
        .max_by_key(|s| (s.member_count, std::cmp::Reverse(s.category_index)))
        .expect("non-empty summaries")
        .category_index;

    let mut out = String::from("doc_id,predicted_category,similarity,rank2_category,rank2_similarity\n");
    let mut fallbacks = 0usize;
    for doc in &test {
        let row = match pvec::classify(&model, &summaries, doc, cfg.seed) {
            Ok(ranked) => {
                let (c1, s1) = ranked[0];
                let (c2, s2) = *ranked.get(1).unwrap_or(&ranked[0]);
                format!("{},{c1},{s1:.16e},{c2},{s2:.16e}\n", doc.id)
            }
            Err(pvec::PvError::NoKnownTokens(_)) => {
                fallbacks += 1;
                format!(
                    "{},{largest},{:.16e},{largest},{:.16e}\n",
                    doc.id, 0.0, 0.0
                )
            }
            Err(e) => return Err(e.into()),
        };
        out.push_str(&row);
    }
    if fallbacks > 0 {
        eprintln!("warning: {fallbacks} test document(s) fell back to the largest category");
    }
    fs::write(out_csv, out)?;
    Ok(())
}

fn gold_labels(corpus: &Corpus, split: Option<Split>) -> HashMap<String, String> {
    corpus
        .documents
        .iter()
        .filter(|d| split.is_none() || d.split == split)
        .filter_map(|d| d.gold_label.clone().map(|l| (d.id.clone(), l)))
        .collect()
}

#[derive(Debug, Serialize)]
struct KnnBlock {
    k: usize,
    report: EvalReport,
}

#[derive(Debug, Serialize)]
struct Report {
    clusart: EvalReport,
    cluster_labels: eval::ClusterLabelMap,
    category_count: usize,
    knn: Option<KnnBlock>,
}

/// Scores classifications against gold labels. Cluster indices are mapped
/// to labels by majority vote over the training assignments. When training
/// and test TF-IDF vector files are supplied, a cosine-kNN baseline is
/// scored on the same gold labels.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    cfg: &RunConfig,
    classifications: &Path,
    assignments_path: &Path,
    manifest: &Path,
    knn_vectors: Option<(&Path, &Path)>,
    out_report: &Path,
) -> anyhow::Result<EvalReport> {
    let corpus = load_manifest(manifest)?;
    let assignments = fuzzyart::load_assignments(assignments_path)?;
    let train_gold = gold_labels(&corpus, Some(Split::Train));
    let test_gold = gold_labels(&corpus, Some(Split::Test));
    let map = map_clusters_majority(&assignments, &train_gold)?;

    let rows = load_classifications(classifications)?;
    let fallback_label = majority_label(&assignments, &train_gold);
    let mut predicted = Vec::with_capacity(rows.len());
    let mut gold = Vec::with_capacity(rows.len());
    for (doc_id, category) in &rows {
        let g = test_gold
            .get(doc_id)
            .with_context(|| format!("no gold label for test doc {doc_id}"))?;
        let p = map
            .label_for(*category)
            .unwrap_or(fallback_label.as_str());
        predicted.push(p.to_string());
        gold.push(g.clone());
    }
    let clusart = prf(&predicted, &gold)?;

    let knn = match knn_vectors {
        Some((train_path, test_path)) => {
            let train_vecs = vectorizer::load_vectors(train_path)?;
            let test_vecs = vectorizer::load_vectors(test_path)?;
            let train: Vec<(DocVector, String)> = train_vecs
                .into_iter()
                .filter_map(|v| train_gold.get(&v.doc_id).cloned().map(|l| (v, l)))
                .collect();
            let mut knn_pred = Vec::new();
            let mut knn_gold = Vec::new();
            for v in &test_vecs {
                if let Some(g) = test_gold.get(&v.doc_id) {
                    knn_pred.push(eval::knn_predict(&train, &v.values, cfg.knn_k)?);
                    knn_gold.push(g.clone());
                }
            }
            Some(KnnBlock {
                k: cfg.knn_k,
                report: prf(&knn_pred, &knn_gold)?,
            })
        }
        None => None,
    };

    let report = Report {
        clusart: clusart.clone(),
        cluster_labels: map,
        category_count: assignments
            .iter()
            .map(|a| a.category_index + 1)
            .max()
            .unwrap_or(0),
        knn,
    };
    fs::write(out_report, serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(clusart)
}

fn majority_label(assignments: &[Assignment], gold: &HashMap<String, String>) -> String {
    let mut votes: HashMap<&str, usize> = HashMap::new();
    for a in assignments {
        if let Some(l) = gold.get(&a.doc_id) {
            *votes.entry(l).or_insert(0) += 1;
        }
    }
    votes
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(l, _)| l.to_string())
        .unwrap_or_default()
}

fn load_classifications(path: &Path) -> anyhow::Result<Vec<(String, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let doc_id = cols.next().context("missing doc_id column")?;
        let category: usize = cols
            .next()
            .context("missing predicted_category column")?
            .parse()
            .with_context(|| format!("bad category on line {}", i + 1))?;
        rows.push((doc_id.to_string(), category));
    }
    Ok(rows)
}

pub fn sweep(
    cfg: &RunConfig,
    train_vectors: &Path,
    grid: &[f64],
    out_csv: &Path,
) -> anyhow::Result<Vec<(f64, usize)>> {
    let vectors = vectorizer::load_vectors(train_vectors)?;
    let table = eval::vigilance_sweep(&vectors, art_params(cfg), grid)?;
    let mut out = String::from("rho,categories\n");
    for (rho, count) in &table {
        out.push_str(&format!("{rho},{count}\n"));
    }
    fs::write(out_csv, out)?;
    Ok(table)
}

/// Writes the cluster -> label mapping table produced during evaluation.
pub fn write_topics(
    assignments_path: &Path,
    manifest: &Path,
    out_csv: &Path,
) -> anyhow::Result<()> {
    let corpus = load_manifest(manifest)?;
    let assignments = fuzzyart::load_assignments(assignments_path)?;
    let train_gold = gold_labels(&corpus, Some(Split::Train));
    let map = map_clusters_majority(&assignments, &train_gold)?;
    let mut members: HashMap<usize, usize> = HashMap::new();
    for a in &assignments {
        *members.entry(a.category_index).or_insert(0) += 1;
    }
    let mut file = fs::File::create(out_csv)?;
    writeln!(file, "category,label,member_count")?;
    for (category, label) in &map.mapping {
        writeln!(file, "{category},{label},{}", members.get(category).unwrap_or(&0))?;
    }
    Ok(())
}
