//! Corpus ingestion: tokenization, labeled AZ datasets, vocabularies.

mod huffman;
mod vocab;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use huffman::{HuffmanCode, HuffmanCoding};
pub use vocab::{build_vocabulary, VocabEntry, Vocabulary};

/// The seven rhetorical categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Aim,
    Ctr,
    Own,
    Bkg,
    Oth,
    Bas,
    Txt,
}

impl Category {
    /// Canonical order, used for deterministic tie-breaking everywhere.
    pub const ALL: [Category; 7] = [
        Category::Aim,
        Category::Ctr,
        Category::Own,
        Category::Bkg,
        Category::Oth,
        Category::Bas,
        Category::Txt,
    ];

    /// Column order of the result tables.
    pub const REPORT_ORDER: [Category; 7] = [
        Category::Aim,
        Category::Ctr,
        Category::Bkg,
        Category::Bas,
        Category::Txt,
        Category::Own,
        Category::Oth,
    ];

    /// Position in [`Category::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Aim => "AIM",
            Category::Ctr => "CTR",
            Category::Own => "OWN",
            Category::Bkg => "BKG",
            Category::Oth => "OTH",
            Category::Bas => "BAS",
            Category::Txt => "TXT",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

/// A lowercased, whitespace-free, non-empty token.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Token(String);

impl Token {
    /// Returns `None` for strings that are empty or contain whitespace.
    pub fn new(s: impl Into<String>) -> Option<Token> {
        let s = s.into();
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Token(s))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub source_id: String,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, source_id: impl Into<String>) -> Self {
        Self {
            tokens,
            source_id: source_id.into(),
        }
    }

    /// Tokenizes `text`.
    pub fn from_text(text: &str, source_id: impl Into<String>) -> Self {
        Self::new(tokenize(text), source_id)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        let words: Vec<&str> = self.tokens.iter().map(Token::as_str).collect();
        words.join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub sentence: Sentence,
    pub category: Category,
}

/// Lowercases, splits on whitespace and strips non-alphanumeric characters
/// from both ends of each piece. Pieces that are pure punctuation vanish.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|piece| {
            let lower = piece.to_lowercase();
            let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
            Token::new(trimmed)
        })
        .collect()
}

/// One sentence per non-blank line; `source_id` is the 1-based line number.
pub fn parse_training_corpus(text: &str) -> Vec<Sentence> {
    text.lines()
        .enumerate()
        .map(|(i, line)| Sentence::from_text(line, (i + 1).to_string()))
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn load_training_corpus(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_training_corpus(&text))
}

/// Marks a line that continues the previous line's sentence.
pub const CONTINUATION_MARKER: &str = "+";

/// Parses `CATEGORY<TAB>text` records; `+` lines are appended to the
/// previous record. Blank lines are skipped.
pub fn parse_labeled_corpus(text: &str) -> Result<Vec<LabeledSentence>> {
    let mut out: Vec<LabeledSentence> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (label, body) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected CATEGORY<TAB>text".into(),
        })?;
        let label = label.trim();
        let tokens = tokenize(body);
        if label == CONTINUATION_MARKER {
            let prev = out.last_mut().ok_or_else(|| Error::Parse {
                line: line_no,
                message: "continuation line without a preceding sentence".into(),
            })?;
            prev.sentence.tokens.extend(tokens);
            continue;
        }
        let category = label.parse::<Category>().map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        out.push(LabeledSentence {
            sentence: Sentence::new(tokens, line_no.to_string()),
            category,
        });
    }
    Ok(out)
}

pub fn load_labeled_corpus(path: impl AsRef<Path>) -> Result<Vec<LabeledSentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labeled_corpus(&text)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassShare {
    pub category: Category,
    pub count: usize,
    pub fraction: f64,
}

/// Per-category counts and fractions in [`Category::ALL`] order. Fractions
/// are 0 for an empty dataset.
pub fn class_distribution(data: &[LabeledSentence]) -> Vec<ClassShare> {
    class_distribution_of(data.iter().map(|d| d.category))
}

pub fn class_distribution_of(labels: impl IntoIterator<Item = Category>) -> Vec<ClassShare> {
    let mut counts = [0usize; 7];
    let mut total = 0usize;
    for c in labels {
        counts[c.index()] += 1;
        total += 1;
    }
    Category::ALL
        .iter()
        .map(|&category| {
            let count = counts[category.index()];
            ClassShare {
                category,
                count,
                fraction: if total == 0 {
                    0.0
                } else {
                    count as f64 / total as f64
                },
            }
        })
        .collect()
}
