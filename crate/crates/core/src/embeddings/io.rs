//! On-disk formats: word2vec text vectors, JSON model bundles, cueword lists.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CuewordLexicon, EmbeddingModel, ModelKind, ParagraphTable, TrainingConfig};
use crate::corpus::{Category, Vocabulary};
use crate::linalg::Matrix;
use crate::{Error, Result};

/// Writes `V d` followed by `word v1 ... vd` lines, 6 decimals, in index order.
pub fn write_word2vec_text(model: &EmbeddingModel, mut w: impl Write) -> std::io::Result<()> {
    let vocab = model.vocabulary();
    writeln!(w, "{} {}", vocab.len(), model.dim())?;
    for (i, row) in model.words().iter_rows().enumerate() {
        w.write_all(vocab.word(i).as_bytes())?;
        for v in row {
            write!(w, " {v:.6}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_word2vec_text(model: &EmbeddingModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_word2vec_text(model, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads the word2vec text format into an [`ModelKind::Imported`] model.
pub fn read_word2vec_text(r: impl Read) -> Result<EmbeddingModel> {
    let mut lines = BufReader::new(r).lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let io_err = |e: std::io::Error| Error::io("<word2vec text>", e);

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?;
    let header = header.map_err(io_err)?;
    let mut parts = header.split_whitespace();
    let mut header_num = |what: &str| -> Result<usize> {
        parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| parse_err(1, format!("header must be `V d`, bad {what}")))
    };
    let v = header_num("V")?;
    let d = header_num("d")?;

    let mut words = Vec::with_capacity(v);
    let mut data = Vec::with_capacity(v * d);
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields.next().unwrap().to_owned();
        let start = data.len();
        for f in fields {
            let x: f64 = f
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad number `{f}`")))?;
            data.push(x);
        }
        if data.len() - start != d {
            return Err(parse_err(
                line_no,
                format!("expected {d} values, found {}", data.len() - start),
            ));
        }
        words.push(word);
    }
    if words.len() != v {
        return Err(parse_err(
            1,
            format!("header announces {v} words, file has {}", words.len()),
        ));
    }
    let vocab = Vocabulary::from_ordered_words(words)?;
    EmbeddingModel::from_parts(
        vocab,
        Matrix::from_vec(v, d, data),
        None,
        TrainingConfig {
            dim: d,
            min_count: 1,
            ..TrainingConfig::default()
        },
        ModelKind::Imported,
    )
}

pub fn load_word2vec_text(path: impl AsRef<Path>) -> Result<EmbeddingModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_word2vec_text(file)
}

/// Complete trained state, including output layer and paragraph table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub model: EmbeddingModel,
    pub paragraphs: Option<ParagraphTable>,
}

pub fn save_bundle(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, bundle).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::io(path, std::io::Error::other(e)))
}

/// One phrase per line; blank lines and `#` comments are ignored.
pub fn parse_cueword_lexicon(text: &str, category: Category) -> Result<CuewordLexicon> {
    let phrases = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    CuewordLexicon::new(category, phrases)
}

pub fn load_cueword_lexicon(path: impl AsRef<Path>, category: Category) -> Result<CuewordLexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cueword_lexicon(&text, category)
}
