use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use argzone::balance::SmoteConfig;
use argzone::classify::ClassifierConfig;
use argzone::corpus::{
    build_vocabulary, load_labeled_corpus, load_training_corpus, Category, Sentence,
};
use argzone::cuebase::{load_category_lexicon, CategoryLexicon};
use argzone::embeddings::{
    infer_paragraph_vector, load_bundle, load_cueword_lexicon, load_word2vec_text, save_bundle,
    save_word2vec_text, train_bswe, train_pvdm, train_word2vec, Architecture, EmbeddingModel,
    InferConfig, ModelBundle, OutputLayer, TrainingConfig,
};
use argzone::eval::{
    cross_validate, evaluate_cuewords, reference_rows, report_tables, report_tsv, Averaging,
    CvConfig, EvaluationReport, ReportConfig, SmotePlacement,
};
use argzone::sentvec::{load_features_tsv, save_features_tsv, vectorize_dataset, Method};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "argzone",
    version,
    about = "Embedding-based rhetorical sentence classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train word, paragraph or cueword-specific embeddings on a plain-text corpus.
    TrainEmbeddings(TrainArgs),
    /// Infer paragraph vectors for new sentences.
    Infer(InferArgs),
    /// Turn a labeled corpus into a feature TSV.
    Vectorize(VectorizeArgs),
    /// Nearest words by cosine similarity.
    Neighbors(NeighborsArgs),
    /// Stratified cross-validation of the classifier (or the cueword baseline).
    Evaluate(EvaluateArgs),
    /// Render saved evaluation reports as a table.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ArchArg {
    Cbow,
    Skipgram,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Hs,
    Neg,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Avgwvec,
    Paravec,
    Bswe,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Avgwvec => Method::Avgwvec,
            MethodArg::Paravec => Method::Paravec,
            MethodArg::Bswe => Method::BsweAvg,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// One sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Model bundle (JSON) to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write word vectors in word2vec text format.
    #[arg(long)]
    text_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "avgwvec")]
    method: MethodArg,
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 40)]
    min_count: u64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, value_enum, default_value = "cbow")]
    arch: ArchArg,
    #[arg(long, value_enum, default_value = "neg")]
    output: OutputArg,
    /// Negative samples per target (with `--output neg`).
    #[arg(long, default_value_t = 5)]
    negative: usize,
    /// Hogwild threads; only `--workers 1` is bit-reproducible.
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.025)]
    learning_rate: f64,
    /// Frequent-word subsampling threshold (off by default).
    #[arg(long)]
    subsample: Option<f64>,
    /// Cueword phrases, one per line (required for `--method bswe`).
    #[arg(long)]
    cuewords: Option<PathBuf>,
    /// Category the cuewords signal.
    #[arg(long, default_value = "AIM")]
    cue_category: Category,
    /// Weight of the language-model loss in the mixed objective.
    #[arg(long, default_value_t = 0.5)]
    mix_alpha: f64,
}

#[derive(Args)]
struct InferArgs {
    /// Paragraph-vector model bundle.
    #[arg(long)]
    model: PathBuf,
    /// Sentence to embed; without it, sentences are read from stdin.
    #[arg(long)]
    text: Option<String>,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct VectorizeArgs {
    /// Model bundle (`.json`) or word2vec text vectors.
    #[arg(long)]
    model: PathBuf,
    /// Labeled corpus (`CATEGORY<TAB>sentence`).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "avgwvec")]
    method: MethodArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct NeighborsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    word: String,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Labeled corpus (`CATEGORY<TAB>sentence`).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Embedding model used to vectorize `--data`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Precomputed feature TSV instead of `--data` and `--model`.
    #[arg(long, conflicts_with_all = ["data", "model"])]
    features: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "avgwvec")]
    method: MethodArg,
    /// Score the cueword baseline with this `CATEGORY<TAB>phrase` lexicon
    /// ("starter" for the shipped one) instead of the classifier.
    #[arg(long)]
    cuewords: Option<String>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
    /// Oversample before splitting (synthetic rows reach the test folds).
    #[arg(long)]
    smote_before_split: bool,
    #[arg(long, conflicts_with = "smote_before_split")]
    no_smote: bool,
    /// Metrics from the summed confusion matrix instead of per-fold means.
    #[arg(long)]
    pooled: bool,
    #[arg(long, default_value_t = 200)]
    classifier_epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Row label in report tables.
    #[arg(long)]
    label: Option<String>,
    /// Write the full report as JSON.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON reports written by `evaluate --report-out`.
    reports: Vec<PathBuf>,
    /// Leave out the published comparison rows.
    #[arg(long)]
    no_reference: bool,
    /// Print `config<TAB>category<TAB>precision<TAB>recall<TAB>f1` instead.
    #[arg(long)]
    tsv: bool,
}

fn load_model(path: &Path) -> Result<EmbeddingModel> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(load_bundle(path)?.model)
    } else {
        Ok(load_word2vec_text(path)?)
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let corpus = load_training_corpus(&a.corpus)?;
    let output = match a.output {
        OutputArg::Hs => OutputLayer::HierarchicalSoftmax,
        OutputArg::Neg => OutputLayer::NegativeSampling {
            negatives: a.negative,
        },
        OutputArg::Full => OutputLayer::FullSoftmax,
    };
    let config = TrainingConfig {
        dim: a.dim,
        window: a.window,
        min_count: a.min_count,
        epochs: a.epochs,
        initial_learning_rate: a.learning_rate,
        architecture: match a.arch {
            ArchArg::Cbow => Architecture::Cbow,
            ArchArg::Skipgram => Architecture::SkipGram,
        },
        output,
        workers: a.workers,
        seed: a.seed,
        subsample: a.subsample,
    };
    let hs = matches!(output, OutputLayer::HierarchicalSoftmax);
    let vocab = build_vocabulary(&corpus, a.min_count, hs)?;
    log::info!("{} sentences, vocabulary of {}", corpus.len(), vocab.len());
    let bundle = match a.method {
        MethodArg::Avgwvec => ModelBundle {
            model: train_word2vec(&corpus, &vocab, &config)?,
            paragraphs: None,
        },
        MethodArg::Paravec => {
            let (model, table) = train_pvdm(&corpus, &vocab, &config)?;
            ModelBundle {
                model,
                paragraphs: Some(table),
            }
        }
        MethodArg::Bswe => {
            let path = a
                .cuewords
                .as_ref()
                .context("--method bswe needs --cuewords FILE")?;
            let lexicon = load_cueword_lexicon(path, a.cue_category)?;
            ModelBundle {
                model: train_bswe(&corpus, &vocab, &lexicon, a.mix_alpha, &config)?,
                paragraphs: None,
            }
        }
    };
    if let Some(&loss) = bundle.model.epoch_losses().last() {
        log::info!("final epoch loss {loss:.4}");
    }
    save_bundle(&bundle, &a.out)?;
    if let Some(p) = &a.text_out {
        save_word2vec_text(&bundle.model, p)?;
    }
    eprintln!(
        "wrote {} ({} words, d = {})",
        a.out.display(),
        bundle.model.vocabulary().len(),
        bundle.model.dim()
    );
    Ok(())
}

fn write_vector(out: &mut impl Write, v: &[f64]) -> io::Result<()> {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    writeln!(out, "{}", cells.join("\t"))
}

fn infer(a: InferArgs) -> Result<()> {
    let model = load_bundle(&a.model)?.model;
    let texts: Vec<String> = match a.text {
        Some(t) => vec![t],
        None => io::stdin().lock().lines().collect::<io::Result<_>>()?,
    };
    let mut out = io::stdout().lock();
    for (i, t) in texts.iter().filter(|t| !t.trim().is_empty()).enumerate() {
        let config = InferConfig {
            steps: a.steps,
            seed: a.seed,
            stream: i as u64,
            ..InferConfig::default()
        };
        let v = infer_paragraph_vector(&model, &Sentence::from_text(t, i.to_string()), &config)?;
        write_vector(&mut out, &v)?;
    }
    Ok(())
}

fn vectorize(a: VectorizeArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let data = load_labeled_corpus(&a.data)?;
    let infer = InferConfig {
        steps: a.steps,
        seed: a.seed,
        ..InferConfig::default()
    };
    let features = vectorize_dataset(&model, &data, a.method.into(), &infer)?;
    if !features.zero_rows.is_empty() {
        log::warn!(
            "{} sentences had no known word and became zero vectors",
            features.zero_rows.len()
        );
    }
    save_features_tsv(&features, &a.out)?;
    eprintln!(
        "wrote {} rows of dimension {} to {}",
        features.len(),
        features.dim(),
        a.out.display()
    );
    Ok(())
}

fn neighbors(a: NeighborsArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let mut out = io::stdout().lock();
    for (word, sim) in model.nearest_neighbors(&a.word, a.top_k)? {
        writeln!(out, "{word}\t{sim:.4}")?;
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let cv = CvConfig {
        n_folds: a.folds,
        seed: a.seed,
        placement: if a.no_smote {
            SmotePlacement::None
        } else if a.smote_before_split {
            SmotePlacement::BeforeSplit
        } else {
            SmotePlacement::WithinFolds
        },
        smote: SmoteConfig {
            k_neighbors: a.smote_k,
            seed: a.seed,
            ..SmoteConfig::default()
        },
        classifier: ClassifierConfig {
            epochs: a.classifier_epochs,
            l2: a.l2,
            seed: a.seed,
            ..ClassifierConfig::default()
        },
        averaging: if a.pooled {
            Averaging::Pooled
        } else {
            Averaging::PerFold
        },
    };
    let method: Method = a.method.into();
    let report = if let Some(lex) = &a.cuewords {
        let data = load_labeled_corpus(
            a.data
                .as_ref()
                .context("the cueword baseline needs --data")?,
        )?;
        let lexicon = if lex == "starter" {
            CategoryLexicon::starter()
        } else {
            load_category_lexicon(lex)?
        };
        let config = ReportConfig {
            label: a.label.clone().unwrap_or_else(|| "Cuewords".into()),
            model: "cuewords".into(),
            corpus: a
                .data
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            ..ReportConfig::default()
        };
        evaluate_cuewords(&data, &lexicon, Category::Own, &cv, config)?
    } else {
        let (features, model_name, corpus) = match (&a.features, &a.data, &a.model) {
            (Some(f), _, _) => (
                load_features_tsv(f, method)?,
                "features".to_owned(),
                f.display().to_string(),
            ),
            (None, Some(d), Some(m)) => {
                let model = load_model(m)?;
                let data = load_labeled_corpus(d)?;
                let infer = InferConfig {
                    steps: a.steps,
                    seed: a.seed,
                    ..InferConfig::default()
                };
                (
                    vectorize_dataset(&model, &data, method, &infer)?,
                    model.kind().to_string(),
                    d.display().to_string(),
                )
            }
            _ => bail!("give --features, or --data with --model (or --cuewords for the baseline)"),
        };
        let label = a
            .label
            .clone()
            .unwrap_or_else(|| format!("{} {}", method.as_str().to_uppercase(), features.dim()));
        let config = ReportConfig {
            label,
            model: model_name,
            corpus,
            ..ReportConfig::default()
        };
        cross_validate(&features, &cv, config)?
    };
    if let Some(p) = &a.report_out {
        fs::write(p, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", report_tables(std::slice::from_ref(&report), &[]));
    println!("macro-F {:.4}", report.macro_f1());
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let reports = a
        .reports
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<EvaluationReport>(&text)
                .with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    if a.tsv {
        print!("{}", report_tsv(&reports));
    } else {
        let reference = if a.no_reference {
            Vec::new()
        } else {
            reference_rows()
        };
        print!("{}", report_tables(&reports, &reference));
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::TrainEmbeddings(a) => train(a),
        Command::Infer(a) => infer(a),
        Command::Vectorize(a) => vectorize(a),
        Command::Neighbors(a) => neighbors(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
    }
}
