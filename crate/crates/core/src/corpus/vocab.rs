use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::huffman::HuffmanCoding;
use super::{Sentence, Token};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub word: String,
    pub count: u64,
}

/// Word index with counts. Indices are dense, assigned by descending count
/// with lexicographic tie-breaking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: HashMap<String, usize>,
    min_count: u64,
    total_tokens: u64,
    huffman: Option<HuffmanCoding>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    entries: Vec<VocabEntry>,
    min_count: u64,
    total_tokens: u64,
    huffman: Option<HuffmanCoding>,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        let index = index_of(&r.entries);
        Vocabulary {
            entries: r.entries,
            index,
            min_count: r.min_count,
            total_tokens: r.total_tokens,
            huffman: r.huffman,
        }
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            entries: v.entries,
            min_count: v.min_count,
            total_tokens: v.total_tokens,
            huffman: v.huffman,
        }
    }
}

fn index_of(entries: &[VocabEntry]) -> HashMap<String, usize> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.word.clone(), i))
        .collect()
}

/// Counts every token and keeps the words seen at least `min_count` times.
pub fn build_vocabulary<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    min_count: u64,
    with_huffman: bool,
) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::InvalidConfig("min_count must be at least 1".into()));
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for s in sentences {
        for t in &s.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let kept: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(w, c)| (w.to_owned(), c))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: min_count as usize,
        });
    }
    let mut vocab = Vocabulary::from_counts(kept, min_count);
    if with_huffman {
        vocab.ensure_huffman();
    }
    Ok(vocab)
}

impl Vocabulary {
    /// Builds a vocabulary from explicit counts, sorting as usual. Counts
    /// below `min_count` are kept as given; use [`build_vocabulary`] for the
    /// cutoff.
    pub fn from_counts(mut counts: Vec<(String, u64)>, min_count: u64) -> Vocabulary {
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let entries: Vec<VocabEntry> = counts
            .into_iter()
            .map(|(word, count)| VocabEntry { word, count })
            .collect();
        let total_tokens = entries.iter().map(|e| e.count).sum();
        Vocabulary {
            index: index_of(&entries),
            entries,
            min_count,
            total_tokens,
            huffman: None,
        }
    }

    /// Keeps the given order (used when loading embeddings from disk, where
    /// row order is the index order and counts are unknown).
    pub fn from_ordered_words(words: Vec<String>) -> Result<Vocabulary> {
        let entries: Vec<VocabEntry> = words
            .into_iter()
            .map(|word| VocabEntry { word, count: 1 })
            .collect();
        let index = index_of(&entries);
        if index.len() != entries.len() {
            return Err(Error::InvalidConfig("duplicate word in vocabulary".into()));
        }
        Ok(Vocabulary {
            total_tokens: entries.len() as u64,
            index,
            entries,
            min_count: 1,
            huffman: None,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Occurrences of retained words in the corpus the vocabulary was built from.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: usize) -> &str {
        &self.entries[index].word
    }

    pub fn count(&self, index: usize) -> u64 {
        self.entries[index].count
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn counts(&self) -> Vec<u64> {
        self.entries.iter().map(|e| e.count).collect()
    }

    /// In-vocabulary token indices of `tokens`, OOV tokens skipped.
    pub fn encode(&self, tokens: &[Token]) -> Vec<usize> {
        tokens
            .iter()
            .filter_map(|t| self.index_of(t.as_str()))
            .collect()
    }

    pub fn huffman(&self) -> Option<&HuffmanCoding> {
        self.huffman.as_ref()
    }

    pub fn ensure_huffman(&mut self) -> &HuffmanCoding {
        if self.huffman.is_none() {
            self.huffman = Some(HuffmanCoding::from_counts(&self.counts()));
        }
        self.huffman.as_ref().unwrap()
    }
}
