//! Multinomial logistic regression with L2 penalty.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::linalg::{dot, softmax_in_place, Matrix};
use crate::sentvec::FeatureMatrix;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Weight of `0.5 * ||W||^2`; the bias is not penalized.
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            l2: 1e-4,
            epochs: 200,
            learning_rate: 0.1,
            batch_size: 32,
            seed: 1,
        }
    }
}

impl ClassifierConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad("l2 must be finite and non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    classes: Vec<Category>,
    /// One row per class.
    weights: Matrix,
    biases: Vec<f64>,
    epoch_losses: Vec<f64>,
}

/// Value and gradient of the mean cross-entropy plus `0.5 * l2 * ||W||^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveGrad {
    pub loss: f64,
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl Classifier {
    /// A classifier with explicit parameters; `classes` must follow
    /// [`Category::ALL`] order without repeats.
    pub fn from_parts(classes: Vec<Category>, weights: Matrix, biases: Vec<f64>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::InvalidConfig(
                "classifier needs at least one class".into(),
            ));
        }
        if !classes.windows(2).all(|w| w[0].index() < w[1].index()) {
            return Err(Error::InvalidConfig(
                "classes must be distinct and in canonical order".into(),
            ));
        }
        if weights.rows() != classes.len() {
            return Err(Error::DimensionMismatch {
                expected: classes.len(),
                actual: weights.rows(),
            });
        }
        if biases.len() != classes.len() {
            return Err(Error::DimensionMismatch {
                expected: classes.len(),
                actual: biases.len(),
            });
        }
        Ok(Classifier {
            classes,
            weights,
            biases,
            epoch_losses: Vec::new(),
        })
    }

    pub fn classes(&self) -> &[Category] {
        &self.classes
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Mean mini-batch objective over each epoch.
    pub fn epoch_losses(&self) -> &[f64] {
        &self.epoch_losses
    }

    fn scores_into(&self, x: &[f64], out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.biases[c] + dot(self.weights.row(c), x);
        }
    }

    /// Class probabilities in [`Classifier::classes`] order.
    pub fn distribution(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let mut p = vec![0.0; self.classes.len()];
        self.scores_into(x, &mut p);
        softmax_in_place(&mut p);
        Ok(p)
    }

    /// Most probable class (earliest class on ties) and the distribution.
    pub fn predict(&self, x: &[f64]) -> Result<(Category, Vec<f64>)> {
        let p = self.distribution(x)?;
        let mut best = 0;
        for (c, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = c;
            }
        }
        Ok((self.classes[best], p))
    }

    pub fn predict_all(&self, rows: &Matrix) -> Result<Vec<Category>> {
        rows.iter_rows()
            .map(|x| self.predict(x).map(|(c, _)| c))
            .collect()
    }

    /// Objective over `rows` with targets given as indices into `classes`.
    pub fn objective(&self, rows: &Matrix, targets: &[usize], l2: f64) -> ObjectiveGrad {
        let idx: Vec<usize> = (0..rows.rows()).collect();
        let mut g = ObjectiveGrad {
            loss: 0.0,
            weights: Matrix::zeros(self.classes.len(), self.dim()),
            biases: vec![0.0; self.classes.len()],
        };
        let mut p = vec![0.0; self.classes.len()];
        g.loss = self.accumulate(rows, targets, &idx, &mut p, &mut g.weights, &mut g.biases);
        g.loss += 0.5 * l2 * self.weights.as_slice().iter().map(|w| w * w).sum::<f64>();
        for (gw, w) in g
            .weights
            .as_mut_slice()
            .iter_mut()
            .zip(self.weights.as_slice())
        {
            *gw += l2 * w;
        }
        g
    }

    /// Mean cross-entropy over `batch`; writes the mean data gradient.
    fn accumulate(
        &self,
        rows: &Matrix,
        targets: &[usize],
        batch: &[usize],
        p: &mut [f64],
        gw: &mut Matrix,
        gb: &mut [f64],
    ) -> f64 {
        gw.as_mut_slice().fill(0.0);
        gb.fill(0.0);
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for &i in batch {
            let x = rows.row(i);
            self.scores_into(x, p);
            let t = targets[i];
            softmax_in_place(p);
            loss -= p[t].max(f64::MIN_POSITIVE).ln();
            p[t] -= 1.0;
            for (c, &e) in p.iter().enumerate() {
                gb[c] += scale * e;
                for (g, &xv) in gw.row_mut(c).iter_mut().zip(x) {
                    *g += scale * e * xv;
                }
            }
        }
        loss * scale
    }
}

/// Per-column mean and standard deviation, 1 for constant columns.
fn column_stats(rows: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (rows.rows() as f64, rows.cols());
    let mut mean = vec![0.0; d];
    for r in rows.iter_rows() {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n;
        }
    }
    let mut var = vec![0.0; d];
    for r in rows.iter_rows() {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    let scale = var
        .into_iter()
        .map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 })
        .collect();
    (mean, scale)
}

/// Seeded mini-batch SGD on standardized columns; the fitted scaling is
/// folded back into `W` and `b`, so the penalty acts on standardized
/// weights. The L2 term is applied as a proximal shrink,
/// `W <- (W - lr * g) / (1 + lr * l2)`, which stays stable for large `l2`.
pub fn train_classifier(features: &FeatureMatrix, config: &ClassifierConfig) -> Result<Classifier> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut present = [false; 7];
    for c in &features.labels {
        present[c.index()] = true;
    }
    let classes: Vec<Category> = Category::ALL
        .into_iter()
        .filter(|c| present[c.index()])
        .collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let class_pos = |c: Category| classes.iter().position(|&k| k == c).unwrap();
    let targets: Vec<usize> = features.labels.iter().map(|&c| class_pos(c)).collect();
    let (n, d, k) = (features.len(), features.dim(), classes.len());
    let (mean, scale) = column_stats(&features.rows);
    let mut rows = features.rows.clone();
    for r in 0..n {
        for ((v, m), s) in rows.row_mut(r).iter_mut().zip(&mean).zip(&scale) {
            *v = (*v - m) / s;
        }
    }

    let mut model = Classifier {
        classes,
        weights: Matrix::zeros(k, d),
        biases: vec![0.0; k],
        epoch_losses: Vec::with_capacity(config.epochs),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut gw = Matrix::zeros(k, d);
    let mut gb = vec![0.0; k];
    let mut p = vec![0.0; k];
    let lr = config.learning_rate;
    let shrink = 1.0 / (1.0 + lr * config.l2);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let loss = model.accumulate(&rows, &targets, batch, &mut p, &mut gw, &mut gb);
            total += loss * batch.len() as f64;
            for (w, g) in model.weights.as_mut_slice().iter_mut().zip(gw.as_slice()) {
                *w = (*w - lr * g) * shrink;
            }
            for (b, g) in model.biases.iter_mut().zip(&gb) {
                *b -= lr * g;
            }
        }
        let penalty = 0.5 * config.l2 * model.weights.as_slice().iter().map(|w| w * w).sum::<f64>();
        model.epoch_losses.push(total / n as f64 + penalty);
    }
    for c in 0..k {
        let w = model.weights.row_mut(c);
        let mut shift = 0.0;
        for ((w, m), s) in w.iter_mut().zip(&mean).zip(&scale) {
            *w /= s;
            shift += *w * m;
        }
        model.biases[c] -= shift;
    }
    Ok(model)
}

/// Header `C d`, then one `CATEGORY<TAB>bias<TAB>w1..wd` line per class.
pub fn write_classifier_tsv(model: &Classifier, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{} {}", model.classes.len(), model.dim())?;
    for (c, cat) in model.classes.iter().enumerate() {
        write!(w, "{cat}\t{:.6}", model.biases[c])?;
        for v in model.weights.row(c) {
            write!(w, "\t{v:.6}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_classifier_tsv(model: &Classifier, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_classifier_tsv(model, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_classifier_tsv(r: impl Read) -> Result<Classifier> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?
        .map_err(|e| parse_err(1, e.to_string()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(1, format!("bad header field {t:?}")))
        })
        .collect::<Result<_>>()?;
    let [k, d] = dims[..] else {
        return Err(parse_err(1, "header must be `C d`".into()));
    };
    let mut classes = Vec::with_capacity(k);
    let mut weights = Matrix::zeros(0, d);
    let mut biases = Vec::with_capacity(k);
    for (i, line) in lines.enumerate() {
        let no = i + 2;
        let line = line.map_err(|e| parse_err(no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let cat: Category = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e: String| parse_err(no, e))?;
        let nums: Vec<f64> = fields
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| parse_err(no, format!("bad number {t:?}")))
            })
            .collect::<Result<_>>()?;
        if nums.len() != d + 1 {
            return Err(parse_err(
                no,
                format!("expected {} numbers, found {}", d + 1, nums.len()),
            ));
        }
        classes.push(cat);
        biases.push(nums[0]);
        weights.push_row(&nums[1..]);
    }
    if classes.len() != k {
        return Err(parse_err(
            0,
            format!("expected {k} classes, found {}", classes.len()),
        ));
    }
    Classifier::from_parts(classes, weights, biases)
}

pub fn load_classifier_tsv(path: impl AsRef<Path>) -> Result<Classifier> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_classifier_tsv(f)
}
