use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::{Example, Gradient, HeadStore, OutputStore, Params, Slot, UpdateMask};
use super::{
    Architecture, CueHead, CuewordLexicon, EmbeddingModel, ModelKind, OutputLayer, OutputParams,
    ParagraphTable, TrainingConfig,
};
use crate::corpus::{HuffmanCoding, Sentence, Vocabulary};
use crate::linalg::Matrix;
use crate::{par, Error, Result};

/// Lowest learning rate as a fraction of the initial one.
const MIN_LR_FRACTION: f64 = 1e-4;

/// Retries before giving up on drawing a negative different from the target.
const NEGATIVE_RETRIES: usize = 16;

/// RNG stream reserved for parameter initialization; workers use 1..
const INIT_STREAM: u64 = 0;

/// Test-time paragraph vector inference settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InferConfig {
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Independent RNG stream, e.g. the row index being vectorized.
    pub stream: u64,
}

impl Default for InferConfig {
    fn default() -> Self {
        InferConfig {
            steps: 50,
            learning_rate: 0.025,
            seed: 1,
            stream: 0,
        }
    }
}

fn init_rows(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let scale = 1.0 / dim as f64;
    let data = (0..rows * dim)
        .map(|_| (rng.random::<f64>() - 0.5) * scale)
        .collect();
    Matrix::from_vec(rows, dim, data)
}

/// Unigram^0.75 noise distribution.
struct NoiseSampler {
    dist: Option<WeightedIndex<f64>>,
}

impl NoiseSampler {
    fn new(vocab: &Vocabulary) -> Self {
        let weights: Vec<f64> = vocab
            .entries()
            .iter()
            .map(|e| (e.count as f64).powf(0.75))
            .collect();
        NoiseSampler {
            dist: if weights.len() > 1 {
                WeightedIndex::new(weights).ok()
            } else {
                None
            },
        }
    }

    fn fill(&self, target: usize, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<usize>) {
        out.clear();
        let Some(dist) = &self.dist else { return };
        for _ in 0..n {
            for _ in 0..NEGATIVE_RETRIES {
                let s = dist.sample(rng);
                if s != target {
                    out.push(s);
                    break;
                }
            }
        }
    }
}

/// How a training position turns into examples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Cbow,
    SkipGram,
    /// Mean of the paragraph row and the context rows predicts the centre.
    ParagraphMemory,
}

struct Job<'a> {
    sentences: &'a [Vec<usize>],
    paragraph_rows: Option<&'a [usize]>,
    cue_labels: Option<&'a [usize]>,
    mix_alpha: f64,
    mode: Mode,
}

struct Schedule {
    initial: f64,
    total: f64,
    processed: AtomicU64,
}

impl Schedule {
    fn rate(&self) -> f64 {
        let done = self.processed.load(Ordering::Relaxed) as f64;
        let frac = (1.0 - done / (self.total + 1.0)).max(MIN_LR_FRACTION);
        self.initial * frac
    }
}

struct Context<'a> {
    config: &'a TrainingConfig,
    noise: Option<NoiseSampler>,
    /// Retention probability per word when subsampling.
    keep: Option<Vec<f64>>,
}

impl<'a> Context<'a> {
    fn new(config: &'a TrainingConfig, vocab: &'a Vocabulary, train_words: u64) -> Self {
        let noise = matches!(config.output, OutputLayer::NegativeSampling { .. })
            .then(|| NoiseSampler::new(vocab));
        let keep = config.subsample.map(|t| {
            let threshold = t * train_words as f64;
            vocab
                .entries()
                .iter()
                .map(|e| {
                    let c = e.count as f64;
                    ((c / threshold).sqrt() + 1.0) * threshold / c
                })
                .collect()
        });
        Context {
            config,
            noise,
            keep,
        }
    }

    fn negatives(&self) -> usize {
        match self.config.output {
            OutputLayer::NegativeSampling { negatives } => negatives,
            _ => 0,
        }
    }
}

/// Buffers reused across positions by one worker.
struct Scratch {
    grad: Gradient,
    kept: Vec<usize>,
    context: Vec<usize>,
    negatives: Vec<usize>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            grad: Gradient::new(dim),
            kept: Vec::new(),
            context: Vec::new(),
            negatives: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Default)]
struct LossTally {
    sum: f64,
    count: u64,
}

fn step(
    params: &Params<'_>,
    ex: &Example<'_>,
    grad: &mut Gradient,
    lr: f64,
    mask: UpdateMask,
    tally: &mut LossTally,
) {
    tally.sum += params.loss_and_grad(ex, grad);
    tally.count += 1;
    params.apply(ex, grad, lr, mask);
}

/// Runs every position of one sentence once. `paragraph` is the D row for
/// paragraph-memory mode.
#[allow(clippy::too_many_arguments)]
fn train_sentence(
    params: &Params<'_>,
    ctx: &Context<'_>,
    mode: Mode,
    words: &[usize],
    paragraph: Option<usize>,
    cue_label: Option<usize>,
    mix_alpha: f64,
    lr: f64,
    mask: UpdateMask,
    rng: &mut ChaCha8Rng,
    s: &mut Scratch,
    tally: &mut LossTally,
) {
    s.kept.clear();
    match &ctx.keep {
        Some(keep) => s.kept.extend(
            words
                .iter()
                .copied()
                .filter(|&w| keep[w] >= rng.random::<f64>()),
        ),
        None => s.kept.extend_from_slice(words),
    }
    let n_neg = ctx.negatives();
    let cue = cue_label
        .map(|l| (l, 1.0 - mix_alpha))
        .filter(|&(_, w)| w != 0.0);
    let len = s.kept.len();
    for pos in 0..len {
        let center = s.kept[pos];
        let radius = rng.random_range(1..=ctx.config.window);
        let lo = pos.saturating_sub(radius);
        let hi = (pos + radius).min(len - 1);
        s.context.clear();
        s.context
            .extend((lo..=hi).filter(|&j| j != pos).map(|j| s.kept[j]));

        match mode {
            Mode::Cbow | Mode::ParagraphMemory => {
                if s.context.is_empty() && paragraph.is_none() {
                    continue;
                }
                if let Some(noise) = &ctx.noise {
                    noise.fill(center, n_neg, rng, &mut s.negatives);
                }
                let ex = Example {
                    inputs: &s.context,
                    paragraph,
                    target: Some(center),
                    negatives: &s.negatives,
                    lm_weight: mix_alpha,
                    cue,
                };
                step(params, &ex, &mut s.grad, lr, mask, tally);
            }
            Mode::SkipGram => {
                let input = [center];
                for k in 0..s.context.len() {
                    let target = s.context[k];
                    if let Some(noise) = &ctx.noise {
                        noise.fill(target, n_neg, rng, &mut s.negatives);
                    }
                    let ex = Example {
                        inputs: &input,
                        paragraph: None,
                        target: Some(target),
                        negatives: &s.negatives,
                        lm_weight: mix_alpha,
                        cue: None,
                    };
                    step(params, &ex, &mut s.grad, lr, mask, tally);
                }
                if cue.is_some() && !s.context.is_empty() {
                    let ex = Example {
                        inputs: &input,
                        paragraph: None,
                        target: None,
                        negatives: &[],
                        lm_weight: 0.0,
                        cue,
                    };
                    step(params, &ex, &mut s.grad, lr, mask, tally);
                }
            }
        }
    }
}

fn run_worker(
    params: &Params<'_>,
    ctx: &Context<'_>,
    job: &Job<'_>,
    range: std::ops::Range<usize>,
    worker: usize,
    schedule: &Schedule,
) -> Vec<LossTally> {
    let config = ctx.config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(worker as u64 + 1);
    let mut scratch = Scratch::new(config.dim);
    let mut tallies = vec![LossTally::default(); config.epochs];
    for tally in tallies.iter_mut() {
        for si in range.clone() {
            let words = &job.sentences[si];
            let lr = schedule.rate();
            schedule
                .processed
                .fetch_add(words.len() as u64, Ordering::Relaxed);
            if words.is_empty() {
                continue;
            }
            train_sentence(
                params,
                ctx,
                job.mode,
                words,
                job.paragraph_rows.map(|p| p[si]),
                job.cue_labels.map(|c| c[si]),
                job.mix_alpha,
                lr,
                UpdateMask::ALL,
                &mut rng,
                &mut scratch,
                tally,
            );
        }
    }
    tallies
}

/// Splits the sentences into one contiguous chunk per worker and trains
/// all chunks concurrently. Returns the mean loss per epoch.
fn run_training(params: &Params<'_>, ctx: &Context<'_>, job: &Job<'_>) -> Vec<f64> {
    let n = job.sentences.len();
    let workers = ctx.config.workers.clamp(1, n.max(1));
    let train_words: u64 = job.sentences.iter().map(|s| s.len() as u64).sum();
    let schedule = Schedule {
        initial: ctx.config.initial_learning_rate,
        total: (train_words * ctx.config.epochs as u64) as f64,
        processed: AtomicU64::new(0),
    };
    let chunk = n.div_ceil(workers);
    let per_worker = par::map_indexed(workers, |w| {
        let range = (w * chunk).min(n)..((w + 1) * chunk).min(n);
        run_worker(params, ctx, job, range, w, &schedule)
    });
    (0..ctx.config.epochs)
        .map(|e| {
            let (sum, count) = per_worker
                .iter()
                .fold((0.0, 0u64), |(s, c), t| (s + t[e].sum, c + t[e].count));
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        })
        .collect()
}

fn prepared_vocab(vocab: &Vocabulary, config: &TrainingConfig) -> Result<Vocabulary> {
    config.validate(vocab.len())?;
    let mut vocab = vocab.clone();
    if config.output == OutputLayer::HierarchicalSoftmax {
        vocab.ensure_huffman();
    }
    Ok(vocab)
}

fn encode_corpus(corpus: &[Sentence], vocab: &Vocabulary) -> Result<Vec<Vec<usize>>> {
    let encoded: Vec<Vec<usize>> = par::map_slice(corpus, |s| vocab.encode(&s.tokens));
    if encoded.iter().all(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    Ok(encoded)
}

fn output_store<'a>(vocab: &'a Vocabulary, config: &TrainingConfig) -> OutputStore<'a> {
    let v = vocab.len();
    let d = config.dim;
    match config.output {
        OutputLayer::FullSoftmax => OutputStore::Full {
            weights: Slot::trainable(&Matrix::zeros(v, d)),
            bias: Slot::trainable(&Matrix::zeros(1, v)),
        },
        OutputLayer::HierarchicalSoftmax => {
            let coding: &HuffmanCoding = vocab.huffman().expect("huffman prepared");
            OutputStore::Hierarchical {
                nodes: Slot::trainable(&Matrix::zeros(coding.inner_nodes(), d)),
                coding,
            }
        }
        OutputLayer::NegativeSampling { .. } => OutputStore::Negative {
            vectors: Slot::trainable(&Matrix::zeros(v, d)),
        },
    }
}

fn output_params(store: &OutputStore<'_>) -> OutputParams {
    match store {
        OutputStore::Full { weights, bias } => OutputParams::Full {
            weights: weights.to_matrix(),
            bias: bias.to_matrix(),
        },
        OutputStore::Hierarchical { nodes, .. } => OutputParams::Hierarchical {
            nodes: nodes.to_matrix(),
        },
        OutputStore::Negative { vectors } => OutputParams::Negative {
            vectors: vectors.to_matrix(),
        },
    }
}

fn mode_for(config: &TrainingConfig) -> Mode {
    match config.architecture {
        Architecture::Cbow => Mode::Cbow,
        Architecture::SkipGram => Mode::SkipGram,
    }
}

/// Shared driver behind word2vec and the cueword-mixed trainer.
fn train_words(
    corpus: &[Sentence],
    vocab: &Vocabulary,
    config: &TrainingConfig,
    cue_labels: Option<&[usize]>,
    mix_alpha: f64,
) -> Result<(EmbeddingModel, Option<CueHead>)> {
    let vocab = prepared_vocab(vocab, config)?;
    let encoded = encode_corpus(corpus, &vocab)?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(INIT_STREAM);
    let words = init_rows(vocab.len(), config.dim, &mut init_rng);

    let train_words: u64 = encoded.iter().map(|s| s.len() as u64).sum();
    let (losses, words, output, head) = {
        let params = Params {
            dim: config.dim,
            words: Slot::trainable(&words),
            paragraphs: None,
            output: output_store(&vocab, config),
            head: cue_labels.map(|_| HeadStore {
                weights: Slot::trainable(&Matrix::zeros(2, config.dim)),
                bias: Slot::trainable(&Matrix::zeros(1, 2)),
            }),
        };
        let ctx = Context::new(config, &vocab, train_words);
        let job = Job {
            sentences: &encoded,
            paragraph_rows: None,
            cue_labels,
            mix_alpha,
            mode: mode_for(config),
        };
        let losses = run_training(&params, &ctx, &job);
        let head = params.head.as_ref().map(|h| CueHead {
            weights: h.weights.to_matrix(),
            bias: h.bias.to_matrix(),
        });
        (
            losses,
            params.words.to_matrix(),
            output_params(&params.output),
            head,
        )
    };
    let model = EmbeddingModel {
        vocab,
        words,
        output: Some(output),
        cue_head: None,
        config: config.clone(),
        kind: ModelKind::Word2Vec,
        epoch_losses: losses,
    };
    Ok((model, head))
}

/// Trains word vectors by SGD on the CBOW or skip-gram objective. With one
/// worker the result depends only on the inputs and `config.seed`.
pub fn train_word2vec(
    corpus: &[Sentence],
    vocab: &Vocabulary,
    config: &TrainingConfig,
) -> Result<EmbeddingModel> {
    train_words(corpus, vocab, config, None, 1.0).map(|(m, _)| m)
}

/// Trains word vectors on `mix_alpha * L_lm + (1 - mix_alpha) * L_cue`,
/// where `L_cue` is the log-loss of a binary predictor reading the context
/// projection and predicting whether the sentence contains a cueword.
pub fn train_bswe(
    corpus: &[Sentence],
    vocab: &Vocabulary,
    lexicon: &CuewordLexicon,
    mix_alpha: f64,
    config: &TrainingConfig,
) -> Result<EmbeddingModel> {
    if !(0.0..=1.0).contains(&mix_alpha) {
        return Err(Error::InvalidConfig(format!(
            "mix_alpha {mix_alpha} outside [0, 1]"
        )));
    }
    let labels: Vec<usize> = par::map_slice(corpus, |s| usize::from(lexicon.matches(s)));
    let matched = labels.iter().sum::<usize>();
    if matched == 0 || matched == corpus.len() {
        return Err(Error::DegenerateWeakLabels {
            matched,
            total: corpus.len(),
        });
    }
    let (mut model, head) = train_words(corpus, vocab, config, Some(&labels), mix_alpha)?;
    model.kind = ModelKind::CategorySpecific;
    model.cue_head = head;
    Ok(model)
}

/// Trains PV-DM: the mean of the paragraph's row of `D` and the context
/// word rows predicts the centre word; `W`, `D` and the output layer are all
/// updated. Sentences sharing a `source_id` share a paragraph row.
pub fn train_pvdm(
    corpus: &[Sentence],
    vocab: &Vocabulary,
    config: &TrainingConfig,
) -> Result<(EmbeddingModel, ParagraphTable)> {
    let vocab = prepared_vocab(vocab, config)?;
    let encoded = encode_corpus(corpus, &vocab)?;

    let mut id_map: HashMap<String, usize> = HashMap::new();
    let rows: Vec<usize> = corpus
        .iter()
        .map(|s| {
            let next = id_map.len();
            *id_map.entry(s.source_id.clone()).or_insert(next)
        })
        .collect();

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(INIT_STREAM);
    let words = init_rows(vocab.len(), config.dim, &mut init_rng);
    let paragraphs = init_rows(id_map.len(), config.dim, &mut init_rng);

    let train_words: u64 = encoded.iter().map(|s| s.len() as u64).sum();
    let (losses, words, paragraphs, output) = {
        let params = Params {
            dim: config.dim,
            words: Slot::trainable(&words),
            paragraphs: Some(Slot::trainable(&paragraphs)),
            output: output_store(&vocab, config),
            head: None,
        };
        let ctx = Context::new(config, &vocab, train_words);
        let job = Job {
            sentences: &encoded,
            paragraph_rows: Some(&rows),
            cue_labels: None,
            mix_alpha: 1.0,
            mode: Mode::ParagraphMemory,
        };
        let losses = run_training(&params, &ctx, &job);
        (
            losses,
            params.words.to_matrix(),
            params.paragraphs.as_ref().unwrap().to_matrix(),
            output_params(&params.output),
        )
    };
    let model = EmbeddingModel {
        vocab,
        words,
        output: Some(output),
        cue_head: None,
        config: config.clone(),
        kind: ModelKind::ParagraphVector,
        epoch_losses: losses,
    };
    Ok((
        model,
        ParagraphTable {
            vectors: paragraphs,
            id_map,
        },
    ))
}

/// Fits a fresh paragraph vector to `sentence` with every trained parameter
/// frozen. `steps = 0` returns the seeded initialization.
pub fn infer_paragraph_vector(
    model: &EmbeddingModel,
    sentence: &Sentence,
    infer: &InferConfig,
) -> Result<Vec<f64>> {
    if model.kind() != ModelKind::ParagraphVector {
        return Err(Error::MethodMismatch {
            method: "paragraph inference".into(),
            model: model.kind().to_string(),
        });
    }
    let words = model.vocabulary().encode(&sentence.tokens);
    if words.is_empty() {
        return Err(Error::NoKnownTokens);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(infer.seed);
    rng.set_stream(infer.stream);
    let init = init_rows(1, model.dim(), &mut rng);
    if infer.steps == 0 {
        return Ok(init.row(0).to_vec());
    }
    let params = model.frozen_params(Some(Slot::trainable(&init)))?;
    // subsampling does not apply at inference time
    let config = TrainingConfig {
        subsample: None,
        ..model.config().clone()
    };
    let ctx = Context::new(&config, model.vocabulary(), 0);
    let mut scratch = Scratch::new(model.dim());
    let mut tally = LossTally::default();
    for _ in 0..infer.steps {
        train_sentence(
            &params,
            &ctx,
            Mode::ParagraphMemory,
            &words,
            Some(0),
            None,
            1.0,
            infer.learning_rate,
            UpdateMask::PARAGRAPHS_ONLY,
            &mut rng,
            &mut scratch,
            &mut tally,
        );
    }
    Ok(params
        .paragraphs
        .as_ref()
        .unwrap()
        .to_matrix()
        .row(0)
        .to_vec())
}
