//! Shared fixtures: finite-difference oracle, synthetic corpora.
#![allow(dead_code)]

use argzone::corpus::{HuffmanCoding, Sentence, Token};
use argzone::embeddings::objective::{Example, Gradient, HeadStore, OutputStore, Params, Slot};
use argzone::linalg::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutKind {
    Full,
    Hierarchical,
    Negative,
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.random_range(-0.5..0.5))
            .collect(),
    )
}

/// Every trainable coordinate of a parameter set, in a fixed order.
pub fn coordinates(params: &Params<'_>) -> Vec<(&'static str, usize, usize, usize)> {
    let mut out = Vec::new();
    let mut add = |name: &'static str, slot: &Slot<'_>, cols: usize| {
        for r in 0..slot.rows() {
            for c in 0..cols {
                out.push((name, r, c, cols));
            }
        }
    };
    add("words", &params.words, params.dim);
    if let Some(p) = &params.paragraphs {
        add("paragraphs", p, params.dim);
    }
    match &params.output {
        OutputStore::Full { weights, bias } => {
            add("out", weights, params.dim);
            add("bias", bias, bias_cols(bias));
        }
        OutputStore::Hierarchical { nodes, .. } => add("out", nodes, params.dim),
        OutputStore::Negative { vectors } => add("out", vectors, params.dim),
    }
    if let Some(h) = &params.head {
        add("head", &h.weights, params.dim);
        add("head_bias", &h.bias, 2);
    }
    out
}

fn bias_cols(slot: &Slot<'_>) -> usize {
    slot.to_matrix().cols()
}

fn slot_of<'p, 'a>(params: &'p Params<'a>, name: &str) -> &'p Slot<'a> {
    match name {
        "words" => &params.words,
        "paragraphs" => params.paragraphs.as_ref().unwrap(),
        "out" => match &params.output {
            OutputStore::Full { weights, .. } => weights,
            OutputStore::Hierarchical { nodes, .. } => nodes,
            OutputStore::Negative { vectors } => vectors,
        },
        "bias" => match &params.output {
            OutputStore::Full { bias, .. } => bias,
            _ => unreachable!(),
        },
        "head" => &params.head.as_ref().unwrap().weights,
        "head_bias" => &params.head.as_ref().unwrap().bias,
        _ => unreachable!(),
    }
}

/// The analytic gradient laid out like [`coordinates`].
pub fn analytic_dense(params: &Params<'_>, ex: &Example<'_>) -> Vec<f64> {
    let mut g = Gradient::new(params.dim);
    params.loss_and_grad(ex, &mut g);
    let coords = coordinates(params);
    let mut dense = vec![0.0; coords.len()];
    let pos = |name: &str, r: usize, c: usize| {
        coords
            .iter()
            .position(|&(n, rr, cc, _)| n == name && rr == r && cc == c)
            .unwrap()
    };
    for &w in ex.inputs {
        for c in 0..params.dim {
            dense[pos("words", w, c)] += g.input_scale * g.projection[c];
        }
    }
    if let Some(p) = ex.paragraph {
        for c in 0..params.dim {
            dense[pos("paragraphs", p, c)] += g.input_scale * g.projection[c];
        }
    }
    for (k, &row) in g.output_rows.iter().enumerate() {
        for c in 0..params.dim {
            dense[pos("out", row, c)] += g.output_grad(k)[c];
        }
    }
    for (j, &b) in g.bias.iter().enumerate() {
        dense[pos("bias", 0, j)] += b;
    }
    if !g.head_weights.is_empty() {
        for k in 0..2 {
            for c in 0..params.dim {
                dense[pos("head", k, c)] += g.head_weights[k * params.dim + c];
            }
            dense[pos("head_bias", 0, k)] += g.head_bias[k];
        }
    }
    dense
}

/// Central differences over every coordinate.
pub fn numeric_dense(params: &Params<'_>, ex: &Example<'_>, eps: f64) -> Vec<f64> {
    let mut g = Gradient::new(params.dim);
    coordinates(params)
        .into_iter()
        .map(|(name, r, c, _)| {
            let slot = slot_of(params, name);
            let orig = slot.get(r, c);
            slot.set(r, c, orig + eps);
            let up = params.loss_and_grad(ex, &mut g);
            slot.set(r, c, orig - eps);
            let down = params.loss_and_grad(ex, &mut g);
            slot.set(r, c, orig);
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// ‖a − n‖ / max(‖a‖, ‖n‖).
pub fn relative_error(a: &[f64], n: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(n)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nn: f64 = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nn);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

pub struct Setup {
    pub words: Matrix,
    pub paragraphs: Option<Matrix>,
    pub out: Matrix,
    pub bias: Matrix,
    pub head: Option<(Matrix, Matrix)>,
    pub coding: HuffmanCoding,
    pub kind: OutKind,
}

impl Setup {
    pub fn random(
        v: usize,
        d: usize,
        kind: OutKind,
        paragraphs: usize,
        head: bool,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let counts: Vec<u64> = (0..v).map(|_| rng.random_range(1..50)).collect();
        let coding = HuffmanCoding::from_counts(&counts);
        let out_rows = if kind == OutKind::Hierarchical {
            v - 1
        } else {
            v
        };
        Setup {
            words: random_matrix(v, d, rng),
            paragraphs: (paragraphs > 0).then(|| random_matrix(paragraphs, d, rng)),
            out: random_matrix(out_rows, d, rng),
            bias: random_matrix(1, v, rng),
            head: head.then(|| (random_matrix(2, d, rng), random_matrix(1, 2, rng))),
            coding,
            kind,
        }
    }

    pub fn params(&self) -> Params<'_> {
        let output = match self.kind {
            OutKind::Full => OutputStore::Full {
                weights: Slot::trainable(&self.out),
                bias: Slot::trainable(&self.bias),
            },
            OutKind::Hierarchical => OutputStore::Hierarchical {
                nodes: Slot::trainable(&self.out),
                coding: &self.coding,
            },
            OutKind::Negative => OutputStore::Negative {
                vectors: Slot::trainable(&self.out),
            },
        };
        Params {
            dim: self.words.cols(),
            words: Slot::trainable(&self.words),
            paragraphs: self.paragraphs.as_ref().map(Slot::trainable),
            output,
            head: self.head.as_ref().map(|(w, b)| HeadStore {
                weights: Slot::trainable(w),
                bias: Slot::trainable(b),
            }),
        }
    }
}

/// Distinct draws from `0..v` excluding `exclude`.
pub fn distinct(v: usize, n: usize, exclude: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut out = Vec::new();
    while out.len() < n {
        let x = rng.random_range(0..v);
        if x != exclude && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

pub fn sentence(words: &[&str], id: usize) -> Sentence {
    Sentence::new(
        words.iter().map(|w| Token::new(*w).unwrap()).collect(),
        id.to_string(),
    )
}

/// "a b d" and "a c d" alternating, `pairs` times each.
pub fn interchangeable_corpus(pairs: usize) -> Vec<Sentence> {
    (0..pairs)
        .flat_map(|i| {
            [
                sentence(&["a", "b", "d"], 2 * i),
                sentence(&["a", "c", "d"], 2 * i + 1),
            ]
        })
        .collect()
}

/// Class `c` draws every token from its own 12-word vocabulary `k{c}w{j}`,
/// so classes share no words. `sizes` follows `Category::ALL`.
pub fn disjoint_zoned_corpus(sizes: &[usize; 7], seed: u64) -> Vec<argzone::LabeledSentence> {
    use argzone::{Category, LabeledSentence};
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (c, &n) in sizes.iter().enumerate() {
        for _ in 0..n {
            let len = rng.random_range(6..=10);
            let words: Vec<String> = (0..len)
                .map(|_| format!("k{c}w{}", rng.random_range(0..12)))
                .collect();
            let id = out.len().to_string();
            out.push(LabeledSentence {
                sentence: Sentence::from_text(&words.join(" "), id),
                category: Category::from_index(c).unwrap(),
            });
        }
    }
    out
}
