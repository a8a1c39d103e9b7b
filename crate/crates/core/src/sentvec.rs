//! Sentence vectors: averaged word vectors or inferred paragraph vectors.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Category, LabeledSentence, Sentence};
use crate::embeddings::{infer_paragraph_vector, EmbeddingModel, InferConfig, ModelKind};
use crate::linalg::Matrix;
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Mean of word2vec vectors.
    Avgwvec,
    /// Paragraph vector inferred per sentence.
    Paravec,
    /// Mean of category-specific (cueword-trained) word vectors.
    BsweAvg,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Avgwvec => "avgwvec",
            Method::Paravec => "paravec",
            Method::BsweAvg => "bswe",
        }
    }

    fn accepts(self, kind: ModelKind) -> bool {
        matches!(
            (self, kind),
            (Method::Avgwvec, ModelKind::Word2Vec | ModelKind::Imported)
                | (
                    Method::BsweAvg,
                    ModelKind::CategorySpecific | ModelKind::Imported
                )
                | (Method::Paravec, ModelKind::ParagraphVector)
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "avgwvec" => Ok(Method::Avgwvec),
            "paravec" => Ok(Method::Paravec),
            "bswe" | "bswe_avg" => Ok(Method::BsweAvg),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Where a feature row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowOrigin {
    /// Row `i` of the original dataset.
    Original(usize),
    /// Interpolated by SMOTE from original row `seed`.
    Synthetic { seed: usize },
}

impl RowOrigin {
    pub fn is_synthetic(self) -> bool {
        matches!(self, RowOrigin::Synthetic { .. })
    }
}

/// Sentence vectors aligned with their labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Matrix,
    pub labels: Vec<Category>,
    pub method: Method,
    /// Rows whose sentence had no in-vocabulary token (kept as zero vectors).
    pub zero_rows: Vec<usize>,
    pub origins: Vec<RowOrigin>,
}

impl FeatureMatrix {
    /// Panics if `rows` and `labels` differ in length.
    pub fn new(rows: Matrix, labels: Vec<Category>, method: Method) -> Self {
        assert_eq!(rows.rows(), labels.len(), "rows and labels must align");
        let origins = (0..labels.len()).map(RowOrigin::Original).collect();
        let zero_rows = rows
            .iter_rows()
            .enumerate()
            .filter(|(_, r)| r.iter().all(|v| *v == 0.0))
            .map(|(i, _)| i)
            .collect();
        FeatureMatrix {
            rows,
            labels,
            method,
            zero_rows,
            origins,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }

    /// Rows at `indices`, in that order, with labels and origins.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let zero: std::collections::HashSet<usize> = self.zero_rows.iter().copied().collect();
        FeatureMatrix {
            rows: self.rows.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            method: self.method,
            zero_rows: indices
                .iter()
                .enumerate()
                .filter(|&(_, i)| zero.contains(i))
                .map(|(k, _)| k)
                .collect(),
            origins: indices.iter().map(|&i| self.origins[i]).collect(),
        }
    }
}

/// Elementwise mean of the word vectors of in-vocabulary tokens; the zero
/// vector when there are none.
pub fn avg_sentence_vector(model: &EmbeddingModel, sentence: &Sentence) -> Vec<f64> {
    model
        .average_vector(&sentence.tokens)
        .unwrap_or_else(|| vec![0.0; model.dim()])
}

/// Vectorizes every sentence with `method`. For [`Method::Paravec`], row `i`
/// is inferred with RNG stream `i` of `paravec.seed`, so the result does not
/// depend on scheduling.
pub fn vectorize_dataset(
    model: &EmbeddingModel,
    data: &[LabeledSentence],
    method: Method,
    paravec: &InferConfig,
) -> Result<FeatureMatrix> {
    if !method.accepts(model.kind()) {
        return Err(Error::MethodMismatch {
            method: method.to_string(),
            model: model.kind().to_string(),
        });
    }
    let d = model.dim();
    let rows: Vec<Option<Vec<f64>>> = par::try_map_indexed(data.len(), |i| {
        let sentence = &data[i].sentence;
        match method {
            Method::Avgwvec | Method::BsweAvg => Ok(model.average_vector(&sentence.tokens)),
            Method::Paravec => {
                let infer = InferConfig {
                    stream: i as u64,
                    ..*paravec
                };
                match infer_paragraph_vector(model, sentence, &infer) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::NoKnownTokens) => Ok(None),
                    Err(e) => Err(e),
                }
            }
        }
    })?;
    let mut matrix = Matrix::zeros(0, d);
    let mut zero_rows = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Some(v) => matrix.push_row(&v),
            None => {
                zero_rows.push(i);
                matrix.push_row(&vec![0.0; d]);
            }
        }
    }
    Ok(FeatureMatrix {
        rows: matrix,
        labels: data.iter().map(|d| d.category).collect(),
        method,
        zero_rows,
        origins: (0..data.len()).map(RowOrigin::Original).collect(),
    })
}

/// `LABEL<TAB>v1<TAB>...<TAB>vd` per row, 6 decimals.
pub fn write_features_tsv(features: &FeatureMatrix, mut w: impl Write) -> std::io::Result<()> {
    for (row, label) in features.rows.iter_rows().zip(&features.labels) {
        w.write_all(label.as_str().as_bytes())?;
        for v in row {
            write!(w, "\t{v:.6}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_features_tsv(features: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_features_tsv(features, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_features_tsv(r: impl Read, method: Method) -> Result<FeatureMatrix> {
    let mut labels = Vec::new();
    let mut data = Vec::new();
    let mut dim: Option<usize> = None;
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io("<features>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let label = fields
            .next()
            .unwrap()
            .parse::<Category>()
            .map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
        let start = data.len();
        for f in fields {
            data.push(f.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad number `{f}`"),
            })?);
        }
        let width = data.len() - start;
        if *dim.get_or_insert(width) != width {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {} values, found {width}", dim.unwrap()),
            });
        }
        labels.push(label);
    }
    let d = dim.unwrap_or(0);
    Ok(FeatureMatrix::new(
        Matrix::from_vec(labels.len(), d, data),
        labels,
        method,
    ))
}

pub fn load_features_tsv(path: impl AsRef<Path>, method: Method) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_features_tsv(file, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Token, Vocabulary};
    use crate::embeddings::TrainingConfig;
    use proptest::prelude::*;

    fn model(rows: &[Vec<f64>]) -> EmbeddingModel {
        let words = (0..rows.len()).map(|i| format!("w{i}")).collect();
        EmbeddingModel::from_parts(
            Vocabulary::from_ordered_words(words).unwrap(),
            Matrix::from_rows(rows[0].len(), rows),
            None,
            TrainingConfig::default(),
            ModelKind::Imported,
        )
        .unwrap()
    }

    fn sent(ids: &[usize]) -> Sentence {
        Sentence::new(
            ids.iter()
                .map(|i| Token::new(format!("w{i}")).unwrap())
                .collect(),
            "s",
        )
    }

    #[test]
    fn mean_of_one_and_two_vectors() {
        let m = model(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(avg_sentence_vector(&m, &sent(&[0])), vec![1.0, 0.0]);
        assert_eq!(avg_sentence_vector(&m, &sent(&[0, 1])), vec![0.5, 0.5]);
    }

    #[test]
    fn oov_tokens_are_skipped() {
        let m = model(&[vec![1.0, 3.0], vec![0.0, 1.0]]);
        let mut s = sent(&[0]);
        s.tokens.push(Token::new("unknown").unwrap());
        assert_eq!(avg_sentence_vector(&m, &s), vec![1.0, 3.0]);
        let only_oov = Sentence::from_text("nothing known", "x");
        assert_eq!(avg_sentence_vector(&m, &only_oov), vec![0.0, 0.0]);
    }

    #[test]
    fn dataset_rows_match_single_sentence_vectors() {
        let m = model(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, -2.0]]);
        let data: Vec<LabeledSentence> =
            [sent(&[0, 2]), Sentence::from_text("zzz", "2"), sent(&[1])]
                .into_iter()
                .zip([Category::Aim, Category::Own, Category::Txt])
                .map(|(sentence, category)| LabeledSentence { sentence, category })
                .collect();
        let f = vectorize_dataset(&m, &data, Method::Avgwvec, &InferConfig::default()).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.zero_rows, vec![1]);
        for (i, d) in data.iter().enumerate() {
            assert_eq!(
                f.rows.row(i),
                avg_sentence_vector(&m, &d.sentence).as_slice()
            );
            assert_eq!(f.labels[i], d.category);
        }
        let empty = vectorize_dataset(&m, &[], Method::Avgwvec, &InferConfig::default()).unwrap();
        assert_eq!((empty.len(), empty.dim()), (0, 2));
    }

    #[test]
    fn method_must_match_model() {
        let m = model(&[vec![1.0]]);
        let err = vectorize_dataset(&m, &[], Method::Paravec, &InferConfig::default()).unwrap_err();
        assert!(matches!(err, Error::MethodMismatch { .. }));
    }

    #[test]
    fn tsv_round_trip() {
        let f = FeatureMatrix::new(
            Matrix::from_rows(2, &[vec![0.5, -1.25], vec![0.0, 0.0]]),
            vec![Category::Bas, Category::Oth],
            Method::Avgwvec,
        );
        let mut buf = Vec::new();
        write_features_tsv(&f, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "BAS\t0.500000\t-1.250000\nOTH\t0.000000\t0.000000\n"
        );
        let back = read_features_tsv(&buf[..], Method::Avgwvec).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.zero_rows, vec![1]);
        assert!(
            read_features_tsv("AIM\t1.0\nAIM\t1.0\t2.0\n".as_bytes(), Method::Avgwvec).is_err()
        );
    }

    proptest! {
        #[test]
        fn average_is_permutation_invariant_and_bounded(
            rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 2..8),
            picks in proptest::collection::vec(0usize..100, 1..12),
            shift in 0usize..12,
        ) {
            let m = model(&rows);
            let ids: Vec<usize> = picks.iter().map(|p| p % rows.len()).collect();
            let v = avg_sentence_vector(&m, &sent(&ids));
            let mut rotated = ids.clone();
            rotated.rotate_left(shift % ids.len());
            let w = avg_sentence_vector(&m, &sent(&rotated));
            for c in 0..3 {
                prop_assert!((v[c] - w[c]).abs() < 1e-12);
                let lo = ids.iter().map(|&i| rows[i][c]).fold(f64::INFINITY, f64::min);
                let hi = ids.iter().map(|&i| rows[i][c]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v[c] >= lo - 1e-12 && v[c] <= hi + 1e-12);
                let direct = ids.iter().map(|&i| rows[i][c]).sum::<f64>() / ids.len() as f64;
                prop_assert!((v[c] - direct).abs() < 1e-12);
            }
        }
    }
}
