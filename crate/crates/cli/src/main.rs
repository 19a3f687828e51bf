//! `clusart` — topic detection pipeline: ingest, preprocess, vectorize,
//! Fuzzy ART training, Paragraph Vector classification, evaluation, and the
//! vigilance sweep. Each stage persists plain-file artifacts and a
//! `run_config.json` capturing the effective parameters.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod stages;

use config::{parse_grid, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "clusart", version, about = "Fuzzy ART topic detection pipeline")]
struct Cli {
    /// Force sequential, reproducible execution (always on; accepted for
    /// compatibility with scripted runs).
    #[arg(long, global = true, action = clap::ArgAction::Set, default_value_t = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

/// Parameters shared across stages. Defaults match `RunConfig::default`.
#[derive(Debug, Args)]
struct Params {
    /// Choice parameter alpha (> 0)
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Learning rate beta in (0, 1]
    #[arg(long, default_value_t = 0.4)]
    beta: f64,
    /// Vigilance rho in [0, 1]
    #[arg(long, default_value_t = 0.8)]
    rho: f64,
    /// Use beta = 1 on a category's first commitment
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    fast_commit: bool,
    /// Maximum training epochs for Fuzzy ART
    #[arg(long, default_value_t = 50)]
    max_epochs: usize,
    /// Vocabulary size n for TF-IDF
    #[arg(long, default_value_t = 1000)]
    vocab_size: usize,
    /// Paragraph/word vector dimensionality
    #[arg(long, default_value_t = 50)]
    pv_dim: usize,
    /// Context half-width for PV-DM
    #[arg(long, default_value_t = 4)]
    window: usize,
    /// Paragraph Vector mode: dm or dbow
    #[arg(long, default_value = "dm")]
    pv_mode: String,
    /// Paragraph Vector training epochs
    #[arg(long, default_value_t = 20)]
    pv_epochs: usize,
    /// Initial SGD learning rate
    #[arg(long, default_value_t = 0.025)]
    learning_rate: f64,
    /// Minimum collection frequency for embedding vocabulary
    #[arg(long, default_value_t = 2)]
    min_count: u64,
    /// Gradient steps when inferring a test paragraph vector
    #[arg(long, default_value_t = 20)]
    infer_epochs: usize,
    /// Neighbors for the kNN baseline
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
    /// Seed for every stochastic component (CLUSART_SEED overrides)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Stopword list file (one word per line); bundled list if omitted
    #[arg(long)]
    stoplist: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a newsgroups-style directory tree into a corpus manifest
    Ingest {
        /// Corpus root directory
        #[arg(long)]
        input: PathBuf,
        /// flat (random split) or predefined (train/ and test/ roots)
        #[arg(long, default_value = "flat")]
        layout: String,
        /// Train fraction for the random split
        #[arg(long, default_value_t = 0.6)]
        split_ratio: f64,
        /// Keep message headers instead of stripping them
        #[arg(long)]
        keep_headers: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output manifest (JSON Lines)
        #[arg(long)]
        output: PathBuf,
    },
    /// Tokenize, filter stopwords, and stem a corpus manifest
    Preprocess {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        stoplist: Option<PathBuf>,
        /// Output token file (JSON Lines)
        #[arg(long)]
        output: PathBuf,
    },
    /// Build the TF-IDF vocabulary and scaled document vectors
    Vectorize {
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1000)]
        vocab_size: usize,
        #[arg(long)]
        vocab_out: PathBuf,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        test_out: PathBuf,
    },
    /// Train the Fuzzy ART clusterer on training vectors
    Train {
        #[arg(long)]
        vectors: PathBuf,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        assignments_out: PathBuf,
    },
    /// Classify test documents against cluster centroids in paragraph space
    Classify {
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        assignments: PathBuf,
        #[command(flatten)]
        params: Params,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score classifications against gold labels (plus optional kNN baseline)
    Evaluate {
        #[arg(long)]
        classifications: PathBuf,
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Training TF-IDF vectors for the kNN baseline
        #[arg(long, requires = "knn_test")]
        knn_train: Option<PathBuf>,
        /// Test TF-IDF vectors for the kNN baseline
        #[arg(long, requires = "knn_train")]
        knn_test: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        knn_k: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train one model per vigilance value and tabulate category counts
    Sweep {
        #[arg(long)]
        vectors: PathBuf,
        #[command(flatten)]
        params: Params,
        /// Inclusive grid start:stop:step
        #[arg(long, default_value = "0.1:0.9:0.1")]
        rho_grid: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run every stage end to end into an output directory
    Pipeline {
        #[arg(long, required_unless_present = "config")]
        input: Option<PathBuf>,
        #[arg(long, default_value = "flat")]
        layout: String,
        #[arg(long, default_value_t = 0.6)]
        split_ratio: f64,
        #[arg(long)]
        keep_headers: bool,
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value = "0.1:0.9:0.1")]
        rho_grid: String,
        /// Replay a persisted run_config.json instead of flags
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output_dir: PathBuf,
    },
}

fn apply_params(cfg: &mut RunConfig, p: &Params) {
    cfg.alpha = p.alpha;
    cfg.beta = p.beta;
    cfg.rho = p.rho;
    cfg.fast_commit = p.fast_commit;
    cfg.max_epochs = p.max_epochs;
    cfg.vocab_size = p.vocab_size;
    cfg.pv_dim = p.pv_dim;
    cfg.window = p.window;
    cfg.pv_mode = p.pv_mode.clone();
    cfg.pv_epochs = p.pv_epochs;
    cfg.learning_rate = p.learning_rate;
    cfg.min_count = p.min_count;
    cfg.infer_epochs = p.infer_epochs;
    cfg.knn_k = p.knn_k;
    cfg.seed = p.seed;
    cfg.stoplist = p.stoplist.clone();
}

/// Parameter ranges are a usage concern: violations exit 2, like any other
/// bad flag, before the pipeline starts.
fn validate(cfg: &RunConfig) -> Result<(), String> {
    if !(0.0..=1.0).contains(&cfg.rho) {
        return Err(format!("--rho must be in [0, 1], got {}", cfg.rho));
    }
    if cfg.alpha <= 0.0 {
        return Err(format!("--alpha must be > 0, got {}", cfg.alpha));
    }
    if !(cfg.beta > 0.0 && cfg.beta <= 1.0) {
        return Err(format!("--beta must be in (0, 1], got {}", cfg.beta));
    }
    if !(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0) {
        return Err(format!("--split-ratio must be in (0, 1), got {}", cfg.split_ratio));
    }
    if cfg.max_epochs == 0 || cfg.pv_epochs == 0 || cfg.infer_epochs == 0 {
        return Err("epoch counts must be >= 1".into());
    }
    if cfg.pv_dim == 0 || cfg.window == 0 || cfg.vocab_size == 0 {
        return Err("--pv-dim, --window, and --vocab-size must be >= 1".into());
    }
    if cfg.knn_k == 0 {
        return Err("--knn-k must be >= 1".into());
    }
    if !matches!(cfg.pv_mode.as_str(), "dm" | "dbow") {
        return Err(format!("--pv-mode must be dm or dbow, got {}", cfg.pv_mode));
    }
    if !matches!(cfg.layout.as_str(), "flat" | "predefined") {
        return Err(format!("--layout must be flat or predefined, got {}", cfg.layout));
    }
    parse_grid(&cfg.rho_grid)?;
    if parse_grid(&cfg.rho_grid)
        .expect("just parsed")
        .iter()
        .any(|r| !(0.0..=1.0).contains(r))
    {
        return Err(format!("--rho-grid values must lie in [0, 1], got {}", cfg.rho_grid));
    }
    Ok(())
}

fn seed_override(cfg: &mut RunConfig) -> Result<(), String> {
    if let Ok(v) = std::env::var("CLUSART_SEED") {
        cfg.seed = v
            .parse()
            .map_err(|e| format!("CLUSART_SEED must be an unsigned integer: {e}"))?;
    }
    Ok(())
}

fn config_path(primary_output: &Path) -> PathBuf {
    primary_output
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("run_config.json")
}

fn run(cli: Cli) -> Result<anyhow::Result<()>, String> {
    let mut cfg = RunConfig {
        deterministic: cli.deterministic,
        ..RunConfig::default()
    };

    Ok(match cli.command {
        Command::Ingest {
            input,
            layout,
            split_ratio,
            keep_headers,
            seed,
            output,
        } => {
            cfg.input = Some(input);
            cfg.layout = layout;
            cfg.split_ratio = split_ratio;
            cfg.keep_headers = keep_headers;
            cfg.seed = seed;
            seed_override(&mut cfg)?;
            validate(&cfg)?;
            cfg.save(&config_path(&output))
                .and(stages::ingest(&cfg, &output).map(|_| ()))
        }
        Command::Preprocess {
            corpus,
            stoplist,
            output,
        } => {
            cfg.stoplist = stoplist;
            validate(&cfg)?;
            cfg.save(&config_path(&output))
                .and(stages::preprocess(&cfg, &corpus, &output))
        }
        Command::Vectorize {
            tokens,
            corpus,
            vocab_size,
            vocab_out,
            train_out,
            test_out,
        } => {
            cfg.vocab_size = vocab_size;
            validate(&cfg)?;
            cfg.save(&config_path(&vocab_out)).and(stages::vectorize(
                &cfg, &tokens, &corpus, &vocab_out, &train_out, &test_out,
            ))
        }
        Command::Train {
            vectors,
            params,
            model_out,
            assignments_out,
        } => {
            apply_params(&mut cfg, &params);
            seed_override(&mut cfg)?;
            validate(&cfg)?;
            cfg.save(&config_path(&model_out)).and(
                stages::train(&cfg, &vectors, &model_out, &assignments_out).map(|n| {
                    println!("categories: {n}");
                }),
            )
        }
        Command::Classify {
            tokens,
            corpus,
            assignments,
            params,
            output,
        } => {
            apply_params(&mut cfg, &params);
            seed_override(&mut cfg)?;
            validate(&cfg)?;
            cfg.save(&config_path(&output)).and(stages::classify(
                &cfg,
                &tokens,
                &corpus,
                &assignments,
                &output,
            ))
        }
        Command::Evaluate {
            classifications,
            assignments,
            corpus,
            knn_train,
            knn_test,
            knn_k,
            output,
        } => {
            cfg.knn_k = knn_k;
            validate(&cfg)?;
            let knn = knn_train.as_deref().zip(knn_test.as_deref());
            cfg.save(&config_path(&output)).and(
                stages::evaluate(&cfg, &classifications, &assignments, &corpus, knn, &output)
                    .map(|r| {
                        println!(
                            "macro P/R/F: {:.4} {:.4} {:.4}",
                            r.macro_precision, r.macro_recall, r.macro_f
                        );
                    }),
            )
        }
        Command::Sweep {
            vectors,
            params,
            rho_grid,
            output,
        } => {
            apply_params(&mut cfg, &params);
            cfg.rho_grid = rho_grid;
            seed_override(&mut cfg)?;
            validate(&cfg)?;
            let grid = parse_grid(&cfg.rho_grid)?;
            cfg.save(&config_path(&output))
                .and(stages::sweep(&cfg, &vectors, &grid, &output).map(|_| ()))
        }
        Command::Pipeline {
            input,
            layout,
            split_ratio,
            keep_headers,
            params,
            rho_grid,
            config,
            output_dir,
        } => {
            match config {
                Some(path) => {
                    cfg = RunConfig::load(&path).map_err(|e| format!("--config: {e}"))?;
                }
                None => {
                    apply_params(&mut cfg, &params);
                    cfg.input = input;
                    cfg.layout = layout;
                    cfg.split_ratio = split_ratio;
                    cfg.keep_headers = keep_headers;
                    cfg.rho_grid = rho_grid;
                    seed_override(&mut cfg)?;
                }
            }
            validate(&cfg)?;
            pipeline(&cfg, &output_dir)
        }
    })
}

/// All stages chained over one output directory.
fn pipeline(cfg: &RunConfig, out_dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out_dir)?;
    cfg.save(&out_dir.join("run_config.json"))?;

    let manifest = out_dir.join("corpus.jsonl");
    let tokens = out_dir.join("tokens.jsonl");
    let vocab = out_dir.join("vocab.json");
    let train_vecs = out_dir.join("vectors.csv");
    let test_vecs = out_dir.join("test_vectors.csv");
    let model = out_dir.join("model.json");
    let assignments = out_dir.join("assignments.csv");
    let classifications = out_dir.join("classifications.csv");
    let topics = out_dir.join("topics.csv");
    let report = out_dir.join("report.json");
    let sweep_csv = out_dir.join("sweep.csv");

    stages::ingest(cfg, &manifest)?;
    stages::preprocess(cfg, &manifest, &tokens)?;
    stages::vectorize(cfg, &tokens, &manifest, &vocab, &train_vecs, &test_vecs)?;
    let n = stages::train(cfg, &train_vecs, &model, &assignments)?;
    println!("categories: {n}");
    stages::classify(cfg, &tokens, &manifest, &assignments, &classifications)?;
    stages::write_topics(&assignments, &manifest, &topics)?;
    let r = stages::evaluate(
        cfg,
        &classifications,
        &assignments,
        &manifest,
        Some((train_vecs.as_path(), test_vecs.as_path())),
        &report,
    )?;
    println!(
        "macro P/R/F: {:.4} {:.4} {:.4}",
        r.macro_precision, r.macro_recall, r.macro_f
    );
    let grid = parse_grid(&cfg.rho_grid).expect("validated");
    stages::sweep(cfg, &train_vecs, &grid, &sweep_csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Err(usage) => {
            eprintln!("error: {usage}");
            ExitCode::from(2)
        }
        Ok(Err(module_error)) => {
            eprintln!("error: {module_error}");
            ExitCode::from(1)
        }
        Ok(Ok(())) => ExitCode::SUCCESS,
    }
}
