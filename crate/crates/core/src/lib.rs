//! Rhetorical sentence classification (argumentative zoning) from learned
//! embeddings.
//!
//! The pipeline has three stages:
//!
//! 1. [`embeddings`] trains word2vec (CBOW / skip-gram with full softmax,
//!    hierarchical softmax or negative sampling), PV-DM paragraph vectors,
//!    and cueword-aware category-specific embeddings on plain-text corpora.
//! 2. [`sentvec`] maps each labeled sentence to a fixed-length vector, either
//!    by averaging word vectors or by inferring a paragraph vector.
//! 3. [`eval`] runs stratified k-fold cross-validation with SMOTE
//!    ([`balance`]) applied to the training folds, trains a multinomial
//!    logistic regression ([`classify`]) and reports per-category
//!    precision / recall / F-measure. [`cuebase`] provides the cueword
//!    matching baseline.
//!
//! Data-parallel inner loops (row vectorization, neighbor search, folds,
//! multi-worker training) run on rayon when the `parallel` feature is
//! enabled (the default) and fall back to plain iteration otherwise.

pub mod balance;
pub mod classify;
pub mod corpus;
pub mod cuebase;
pub mod embeddings;
mod error;
pub mod eval;
pub mod linalg;
pub mod par;
pub mod sentvec;

pub use corpus::{Category, LabeledSentence, Sentence, Token, Vocabulary};
pub use error::{Error, Result};
