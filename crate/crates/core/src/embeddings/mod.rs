//! Embedding trainers: word2vec (CBOW / skip-gram), PV-DM paragraph vectors
//! and cueword-aware category-specific word vectors.

mod io;
pub mod objective;
mod train;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, Sentence, Token, Vocabulary};
use crate::linalg::{cosine, softmax_in_place, Matrix};
use crate::{par, Error, Result};

use objective::{HeadStore, OutputStore, Params, Slot};

pub use io::{
    load_bundle, load_cueword_lexicon, load_word2vec_text, parse_cueword_lexicon,
    read_word2vec_text, save_bundle, save_word2vec_text, write_word2vec_text, ModelBundle,
};
pub use train::{infer_paragraph_vector, train_bswe, train_pvdm, train_word2vec, InferConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Architecture {
    Cbow,
    SkipGram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputLayer {
    HierarchicalSoftmax,
    NegativeSampling {
        negatives: usize,
    },
    /// Exact softmax; only for small vocabularies.
    FullSoftmax,
}

/// Largest vocabulary the full softmax output accepts.
pub const FULL_SOFTMAX_MAX_VOCAB: usize = 1000;

/// Threshold used when frequent-word subsampling is switched on.
pub const DEFAULT_SUBSAMPLE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub dim: usize,
    /// Maximum context half-width; the effective radius is drawn per position.
    pub window: usize,
    pub min_count: u64,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub architecture: Architecture,
    pub output: OutputLayer,
    pub workers: usize,
    pub seed: u64,
    /// Frequent-word subsampling threshold, off when `None`.
    pub subsample: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 100,
            window: 10,
            min_count: 40,
            epochs: 5,
            initial_learning_rate: 0.025,
            architecture: Architecture::Cbow,
            output: OutputLayer::NegativeSampling { negatives: 5 },
            workers: 4,
            seed: 1,
            subsample: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self, vocab_len: usize) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if !(self.initial_learning_rate > 0.0 && self.initial_learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if let Some(t) = self.subsample {
            if t.is_nan() || t <= 0.0 {
                return bad("subsample threshold must be positive");
            }
        }
        match self.output {
            OutputLayer::NegativeSampling { negatives: 0 } => bad("negative sampling needs at least one negative"),
            OutputLayer::FullSoftmax if vocab_len > FULL_SOFTMAX_MAX_VOCAB => Err(Error::InvalidConfig(format!(
                "full softmax is limited to {FULL_SOFTMAX_MAX_VOCAB} words, vocabulary has {vocab_len}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Which trainer produced a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Word2Vec,
    ParagraphVector,
    CategorySpecific,
    /// Word vectors loaded from the text format; output layer unknown.
    Imported,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Word2Vec => "word2vec",
            ModelKind::ParagraphVector => "paragraph-vector",
            ModelKind::CategorySpecific => "category-specific",
            ModelKind::Imported => "imported",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OutputParams {
    /// `bias` is a 1×V row.
    Full {
        weights: Matrix,
        bias: Matrix,
    },
    Hierarchical {
        nodes: Matrix,
    },
    Negative {
        vectors: Matrix,
    },
}

/// Binary cueword predictor trained alongside category-specific embeddings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CueHead {
    /// 2×d
    pub weights: Matrix,
    /// 1×2
    pub bias: Matrix,
}

impl CueHead {
    /// Probability that projection `h` comes from a cueword sentence.
    pub fn probability(&self, h: &[f64]) -> f64 {
        let mut z = [
            self.bias.get(0, 0) + crate::linalg::dot(self.weights.row(0), h),
            self.bias.get(0, 1) + crate::linalg::dot(self.weights.row(1), h),
        ];
        softmax_in_place(&mut z);
        z[1]
    }
}

/// Trained (or imported) embeddings. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingModel {
    vocab: Vocabulary,
    words: Matrix,
    output: Option<OutputParams>,
    cue_head: Option<CueHead>,
    config: TrainingConfig,
    kind: ModelKind,
    epoch_losses: Vec<f64>,
}

impl EmbeddingModel {
    /// Assembles a model from parts, e.g. hand-set parameters in tests.
    pub fn from_parts(
        vocab: Vocabulary,
        words: Matrix,
        output: Option<OutputParams>,
        config: TrainingConfig,
        kind: ModelKind,
    ) -> Result<Self> {
        if words.rows() != vocab.len() {
            return Err(Error::DimensionMismatch {
                expected: vocab.len(),
                actual: words.rows(),
            });
        }
        let d = words.cols();
        let out_dim = match &output {
            Some(OutputParams::Full { weights, bias }) => {
                if bias.cols() != vocab.len() || weights.rows() != vocab.len() {
                    return Err(Error::DimensionMismatch {
                        expected: vocab.len(),
                        actual: weights.rows(),
                    });
                }
                weights.cols()
            }
            Some(OutputParams::Hierarchical { nodes }) => nodes.cols(),
            Some(OutputParams::Negative { vectors }) => vectors.cols(),
            None => d,
        };
        if out_dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: out_dim,
            });
        }
        let mut vocab = vocab;
        if matches!(output, Some(OutputParams::Hierarchical { .. })) {
            vocab.ensure_huffman();
        }
        Ok(EmbeddingModel {
            vocab,
            words,
            output,
            cue_head: None,
            config: TrainingConfig { dim: d, ..config },
            kind,
            epoch_losses: Vec::new(),
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.words.cols()
    }

    /// The input word matrix, one row per vocabulary index.
    pub fn words(&self) -> &Matrix {
        &self.words
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f64]> {
        self.vocab.index_of(word).map(|i| self.words.row(i))
    }

    pub fn output(&self) -> Option<&OutputParams> {
        self.output.as_ref()
    }

    pub fn cue_head(&self) -> Option<&CueHead> {
        self.cue_head.as_ref()
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Mean training loss per example, one entry per epoch.
    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    /// Order-independent checksum of the word matrix bits.
    pub fn checksum(&self) -> u64 {
        self.words
            .as_slice()
            .iter()
            .fold(0xcbf2_9ce4_8422_2325u64, |acc, v| {
                (acc ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3)
            })
    }

    /// Read-only training view of this model, optionally with extra
    /// paragraph rows.
    pub(crate) fn frozen_params<'a>(&'a self, paragraphs: Option<Slot<'a>>) -> Result<Params<'a>> {
        let output = match self.output.as_ref() {
            Some(OutputParams::Full { weights, bias }) => OutputStore::Full {
                weights: Slot::Frozen(weights),
                bias: Slot::Frozen(bias),
            },
            Some(OutputParams::Hierarchical { nodes }) => OutputStore::Hierarchical {
                nodes: Slot::Frozen(nodes),
                coding: self
                    .vocab
                    .huffman()
                    .expect("hierarchical model without Huffman codes"),
            },
            Some(OutputParams::Negative { vectors }) => OutputStore::Negative {
                vectors: Slot::Frozen(vectors),
            },
            None => {
                return Err(Error::MethodMismatch {
                    method: "inference".into(),
                    model: self.kind.to_string(),
                })
            }
        };
        Ok(Params {
            dim: self.dim(),
            words: Slot::Frozen(&self.words),
            paragraphs,
            output,
            head: self.cue_head.as_ref().map(|h| HeadStore {
                weights: Slot::Frozen(&h.weights),
                bias: Slot::Frozen(&h.bias),
            }),
        })
    }

    /// Predicted distribution over the vocabulary for the centre word of a
    /// context window, with the CBOW projection (mean of context rows).
    /// Full softmax gives `softmax(b + U h)`; hierarchical softmax gives the
    /// product of branch probabilities along each word's path. OOV context
    /// tokens are skipped.
    pub fn forward_predict(&self, context: &[Token]) -> Result<Vec<f64>> {
        let h = self.average_vector(context).ok_or(Error::NoKnownTokens)?;
        self.distribution_for(&h)
    }

    /// Output distribution for an explicit projection `h`.
    pub fn distribution_for(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: h.len(),
            });
        }
        match self.output.as_ref() {
            Some(OutputParams::Full { weights, bias }) => {
                let mut y: Vec<f64> = weights
                    .iter_rows()
                    .zip(bias.row(0))
                    .map(|(u, b)| b + crate::linalg::dot(u, h))
                    .collect();
                softmax_in_place(&mut y);
                Ok(y)
            }
            Some(OutputParams::Hierarchical { nodes }) => {
                let coding = self
                    .vocab
                    .huffman()
                    .expect("hierarchical model without Huffman codes");
                Ok((0..self.vocab.len())
                    .map(|w| {
                        let code = coding.code(w);
                        code.bits
                            .iter()
                            .zip(&code.points)
                            .map(|(&bit, &p)| {
                                let x = crate::linalg::dot(nodes.row(p as usize), h);
                                crate::linalg::sigmoid(if bit == 0 { x } else { -x })
                            })
                            .product()
                    })
                    .collect())
            }
            _ => Err(Error::MethodMismatch {
                method: "forward prediction".into(),
                model: "negative-sampling or output-less".into(),
            }),
        }
    }

    /// The `top_k` words closest to `word` by cosine of their input vectors,
    /// excluding `word` itself. Ties keep vocabulary order.
    pub fn nearest_neighbors(&self, word: &str, top_k: usize) -> Result<Vec<(String, f64)>> {
        let query = self
            .vocab
            .index_of(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))?;
        if top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be at least 1".into()));
        }
        let q = self.words.row(query);
        let sims = par::map_indexed(self.vocab.len(), |i| cosine(q, self.words.row(i)));
        let mut order: Vec<usize> = (0..self.vocab.len()).filter(|&i| i != query).collect();
        order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]).then(a.cmp(&b)));
        order.truncate(top_k);
        Ok(order
            .into_iter()
            .map(|i| (self.vocab.word(i).to_owned(), sims[i]))
            .collect())
    }

    /// Mean of the input vectors of in-vocabulary tokens; `None` when every
    /// token is out of vocabulary.
    pub fn average_vector(&self, tokens: &[Token]) -> Option<Vec<f64>> {
        let mut n = 0usize;
        let mut acc = vec![0.0; self.dim()];
        for t in tokens {
            if let Some(i) = self.vocab.index_of(t.as_str()) {
                for (a, v) in acc.iter_mut().zip(self.words.row(i)) {
                    *a += v;
                }
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        let inv = n as f64;
        acc.iter_mut().for_each(|a| *a /= inv);
        Some(acc)
    }
}

/// One row per training paragraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParagraphTable {
    pub vectors: Matrix,
    pub id_map: HashMap<String, usize>,
}

impl ParagraphTable {
    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.rows() == 0
    }

    pub fn vector(&self, source_id: &str) -> Option<&[f64]> {
        self.id_map.get(source_id).map(|&r| self.vectors.row(r))
    }
}

/// Cueword phrases indicating one category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuewordLexicon {
    pub category: Category,
    phrases: Vec<Vec<String>>,
}

impl CuewordLexicon {
    /// Phrases are tokenized; empty ones are dropped.
    pub fn new<S: AsRef<str>>(
        category: Category,
        phrases: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let phrases: Vec<Vec<String>> = phrases
            .into_iter()
            .map(|p| {
                crate::corpus::tokenize(p.as_ref())
                    .into_iter()
                    .map(|t| t.as_str().to_owned())
                    .collect::<Vec<_>>()
            })
            .filter(|p: &Vec<String>| !p.is_empty())
            .collect();
        if phrases.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(CuewordLexicon { category, phrases })
    }

    pub fn phrases(&self) -> &[Vec<String>] {
        &self.phrases
    }

    pub fn matches(&self, sentence: &Sentence) -> bool {
        self.phrases
            .iter()
            .any(|p| crate::cuebase::contains_phrase(&sentence.tokens, p))
    }
}
