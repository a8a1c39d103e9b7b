use std::path::PathBuf;

use crate::corpus::Category;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no word reaches the minimum count of {min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("training corpus contains no in-vocabulary tokens")]
    EmptyCorpus,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("word `{0}` is not in the vocabulary")]
    OutOfVocabulary(String),

    #[error("no in-vocabulary tokens in the input")]
    NoKnownTokens,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("method {method} cannot use a {model} model")]
    MethodMismatch { method: String, model: String },

    #[error("cueword lexicon matches {matched} of {total} training sentences; weak labels are degenerate")]
    DegenerateWeakLabels { matched: usize, total: usize },

    #[error("class {category} has {count} member(s); at least 2 are needed to oversample")]
    TooFewMembers { category: Category, count: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("cannot split {rows} rows into {folds} folds")]
    TooManyFolds { folds: usize, rows: usize },

    #[error("lexicon is empty")]
    EmptyLexicon,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
