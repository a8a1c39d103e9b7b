//! Cueword-matching baseline: the category whose lexicon matches the
//! longest phrase wins.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Category, Sentence, Token};
use crate::{Error, Result};

/// Shipped starter lexicon in the `CATEGORY<TAB>phrase` file format.
pub const STARTER_LEXICON: &str = "\
AIM\tthis paper
AIM\twe present
BAS\tfollowing
BAS\tbased on
CTR\tin contrast
CTR\thowever
TXT\tthe next section
TXT\tsection describes
";

pub(crate) fn contains_phrase(tokens: &[Token], phrase: &[String]) -> bool {
    !phrase.is_empty()
        && tokens
            .windows(phrase.len())
            .any(|w| w.iter().zip(phrase).all(|(t, p)| t.as_str() == p))
}

/// Tokenized phrases per category, indexed by [`Category::index`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryLexicon {
    phrases: [Vec<Vec<String>>; 7],
}

impl CategoryLexicon {
    pub fn new(entries: impl IntoIterator<Item = (Category, impl AsRef<str>)>) -> Result<Self> {
        let mut phrases: [Vec<Vec<String>>; 7] = Default::default();
        for (cat, text) in entries {
            let toks: Vec<String> = tokenize(text.as_ref())
                .into_iter()
                .map(|t| t.as_str().to_owned())
                .collect();
            if !toks.is_empty() {
                phrases[cat.index()].push(toks);
            }
        }
        if phrases.iter().all(Vec::is_empty) {
            return Err(Error::EmptyLexicon);
        }
        Ok(CategoryLexicon { phrases })
    }

    pub fn starter() -> Self {
        parse_category_lexicon(STARTER_LEXICON).expect("starter lexicon parses")
    }

    pub fn phrases(&self, category: Category) -> &[Vec<String>] {
        &self.phrases[category.index()]
    }

    /// Length of the longest phrase of `category` contained in `sentence`.
    pub fn longest_match(&self, sentence: &Sentence, category: Category) -> Option<usize> {
        self.phrases[category.index()]
            .iter()
            .filter(|p| contains_phrase(&sentence.tokens, p))
            .map(Vec::len)
            .max()
    }
}

/// Lines `CATEGORY<TAB>phrase`; blank lines and `#` comments are skipped.
pub fn parse_category_lexicon(text: &str) -> Result<CategoryLexicon> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (cat, phrase) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected CATEGORY<TAB>phrase".into(),
        })?;
        let cat: Category = cat.trim().parse().map_err(|message| Error::Parse {
            line: i + 1,
            message,
        })?;
        entries.push((cat, phrase.to_owned()));
    }
    CategoryLexicon::new(entries)
}

pub fn read_category_lexicon(mut r: impl Read) -> Result<CategoryLexicon> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })?;
    parse_category_lexicon(&text)
}

pub fn load_category_lexicon(path: impl AsRef<Path>) -> Result<CategoryLexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_category_lexicon(&text)
}

/// Longest matching phrase decides; equal lengths go to the earlier
/// category in [`Category::ALL`]; no match gives `default`.
pub fn cueword_classify(
    sentence: &Sentence,
    lexicon: &CategoryLexicon,
    default: Category,
) -> Category {
    let mut best: Option<(usize, Category)> = None;
    for cat in Category::ALL {
        if let Some(len) = lexicon.longest_match(sentence, cat) {
            if best.is_none_or(|(b, _)| len > b) {
                best = Some((len, cat));
            }
        }
    }
    best.map_or(default, |(_, c)| c)
}
