//! Per-example loss and gradient of the embedding objectives, plus the
//! shared parameter store the trainers update.
//!
//! One [`Example`] is a projection `h` (the mean of some word rows and
//! optionally one paragraph row) scored against a target word by the output
//! layer, optionally plus a weighted binary cueword prediction read from the
//! same `h`. The same [`Params::loss_and_grad`] drives training, inference and
//! the finite-difference checks in the test suite.
//!
//! Trainable matrices are stored as relaxed atomics so that several workers
//! may update them concurrently without locks. Lost updates are possible
//! under contention; with one worker every update is applied in order.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::corpus::HuffmanCoding;
use crate::linalg::{log_sigmoid, sigmoid, softmax_in_place, Matrix};

/// Dense matrix of `f64` stored bitwise in `AtomicU64`s.
#[derive(Debug)]
pub struct AtomicMatrix {
    rows: usize,
    cols: usize,
    data: Vec<AtomicU64>,
}

impl AtomicMatrix {
    pub fn from_matrix(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m
                .as_slice()
                .iter()
                .map(|v| AtomicU64::new(v.to_bits()))
                .collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_matrix(&Matrix::zeros(rows, cols))
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(
            self.rows,
            self.cols,
            self.data
                .iter()
                .map(|a| f64::from_bits(a.load(Ordering::Relaxed)))
                .collect(),
        )
    }

    #[inline]
    fn cell(&self, r: usize, c: usize) -> &AtomicU64 {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        f64::from_bits(self.cell(r, c).load(Ordering::Relaxed))
    }

    #[inline]
    pub fn set(&self, r: usize, c: usize, v: f64) {
        self.cell(r, c).store(v.to_bits(), Ordering::Relaxed);
    }

    /// `row[r] += alpha * x`, one unsynchronized read-modify-write per cell.
    #[inline]
    pub fn add_to_row(&self, r: usize, alpha: f64, x: &[f64]) {
        for (c, xi) in x.iter().enumerate() {
            let cell = self.cell(r, c);
            let v = f64::from_bits(cell.load(Ordering::Relaxed)) + alpha * xi;
            cell.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

/// A parameter block that is either trainable or borrowed read-only.
#[derive(Debug)]
pub enum Slot<'a> {
    Trainable(AtomicMatrix),
    Frozen(&'a Matrix),
}

impl Slot<'_> {
    pub fn trainable(m: &Matrix) -> Self {
        Slot::Trainable(AtomicMatrix::from_matrix(m))
    }

    pub fn rows(&self) -> usize {
        match self {
            Slot::Trainable(m) => m.rows,
            Slot::Frozen(m) => m.rows(),
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        match self {
            Slot::Trainable(m) => m.get(r, c),
            Slot::Frozen(m) => m.get(r, c),
        }
    }

    #[inline]
    pub fn dot_row(&self, r: usize, x: &[f64]) -> f64 {
        match self {
            Slot::Trainable(m) => x.iter().enumerate().map(|(c, v)| m.get(r, c) * v).sum(),
            Slot::Frozen(m) => crate::linalg::dot(m.row(r), x),
        }
    }

    /// `out += alpha * row[r]`
    #[inline]
    pub fn axpy_row(&self, r: usize, alpha: f64, out: &mut [f64]) {
        match self {
            Slot::Trainable(m) => {
                for (c, o) in out.iter_mut().enumerate() {
                    *o += alpha * m.get(r, c);
                }
            }
            Slot::Frozen(m) => crate::linalg::axpy(alpha, m.row(r), out),
        }
    }

    /// No-op on frozen slots.
    #[inline]
    pub fn add_to_row(&self, r: usize, alpha: f64, x: &[f64]) {
        if let Slot::Trainable(m) = self {
            m.add_to_row(r, alpha, x);
        }
    }

    /// Panics on frozen slots.
    pub fn set(&self, r: usize, c: usize, v: f64) {
        match self {
            Slot::Trainable(m) => m.set(r, c, v),
            Slot::Frozen(_) => panic!("attempt to write a frozen parameter"),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        match self {
            Slot::Trainable(m) => m.to_matrix(),
            Slot::Frozen(m) => (*m).clone(),
        }
    }
}

/// Output layer parameters during training.
#[derive(Debug)]
pub enum OutputStore<'a> {
    /// `y = b + U h`; `bias` is a 1×V row.
    Full { weights: Slot<'a>, bias: Slot<'a> },
    /// One vector per inner Huffman node.
    Hierarchical {
        nodes: Slot<'a>,
        coding: &'a HuffmanCoding,
    },
    /// One output vector per word.
    Negative { vectors: Slot<'a> },
}

/// Binary cueword predictor `softmax(A h + c)` with `A` 2×d, `c` a 1×2 row.
#[derive(Debug)]
pub struct HeadStore<'a> {
    pub weights: Slot<'a>,
    pub bias: Slot<'a>,
}

#[derive(Debug)]
pub struct Params<'a> {
    pub dim: usize,
    pub words: Slot<'a>,
    pub paragraphs: Option<Slot<'a>>,
    pub output: OutputStore<'a>,
    pub head: Option<HeadStore<'a>>,
}

/// One training example. See the module docs.
#[derive(Clone, Copy, Debug)]
pub struct Example<'e> {
    /// Word rows averaged into the projection.
    pub inputs: &'e [usize],
    /// Paragraph row joining the average.
    pub paragraph: Option<usize>,
    /// Word predicted by the output layer; `None` skips the language-model term.
    pub target: Option<usize>,
    /// Noise words, used by the negative-sampling output only.
    pub negatives: &'e [usize],
    /// Weight of the language-model term.
    pub lm_weight: f64,
    /// `(label in {0, 1}, weight)` of the cueword term.
    pub cue: Option<(usize, f64)>,
}

impl<'e> Example<'e> {
    pub fn lm(inputs: &'e [usize], target: usize, negatives: &'e [usize]) -> Self {
        Example {
            inputs,
            paragraph: None,
            target: Some(target),
            negatives,
            lm_weight: 1.0,
            cue: None,
        }
    }

    fn fan_in(&self) -> usize {
        self.inputs.len() + usize::from(self.paragraph.is_some())
    }
}

/// Gradient of one example. Only rows touched by the example are listed.
#[derive(Clone, Debug, Default)]
pub struct Gradient {
    pub projection: Vec<f64>,
    /// Dense 1/fan_in share of `projection` each input row receives.
    pub input_scale: f64,
    pub output_rows: Vec<usize>,
    /// `output_rows.len() * dim` values, row-major.
    pub output_grads: Vec<f64>,
    /// Full softmax only: `d loss / d b`, one entry per word.
    pub bias: Vec<f64>,
    /// 2×dim, row-major; empty when the example has no cue term.
    pub head_weights: Vec<f64>,
    pub head_bias: [f64; 2],
    /// Forward projection of the last example.
    pub h: Vec<f64>,
    logits: Vec<f64>,
}

impl Gradient {
    pub fn new(dim: usize) -> Self {
        Gradient {
            projection: vec![0.0; dim],
            h: vec![0.0; dim],
            ..Default::default()
        }
    }

    fn reset(&mut self, dim: usize) {
        self.projection.clear();
        self.projection.resize(dim, 0.0);
        self.h.clear();
        self.h.resize(dim, 0.0);
        self.output_rows.clear();
        self.output_grads.clear();
        self.bias.clear();
        self.head_weights.clear();
        self.head_bias = [0.0; 2];
    }

    fn push_output_row(&mut self, row: usize, scale: f64, h: &[f64]) {
        self.output_rows.push(row);
        self.output_grads.extend(h.iter().map(|v| scale * v));
    }

    pub fn output_grad(&self, k: usize) -> &[f64] {
        let d = self.projection.len();
        &self.output_grads[k * d..(k + 1) * d]
    }
}

/// Which parameter groups an SGD step may change.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateMask {
    pub words: bool,
    pub paragraphs: bool,
    pub output: bool,
    pub head: bool,
}

impl UpdateMask {
    pub const ALL: UpdateMask = UpdateMask {
        words: true,
        paragraphs: true,
        output: true,
        head: true,
    };

    pub const PARAGRAPHS_ONLY: UpdateMask = UpdateMask {
        words: false,
        paragraphs: true,
        output: false,
        head: false,
    };
}

impl Params<'_> {
    /// Mean of the example's input rows into `out`.
    pub fn project(&self, ex: &Example<'_>, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let n = ex.fan_in();
        assert!(n > 0, "example without inputs");
        let share = 1.0 / n as f64;
        for &w in ex.inputs {
            self.words.axpy_row(w, share, out);
        }
        if let Some(p) = ex.paragraph {
            self.paragraphs
                .as_ref()
                .expect("paragraph example without a paragraph table")
                .axpy_row(p, share, out);
        }
    }

    /// Loss of one example; fills `grad` with its gradient at the current
    /// parameters.
    pub fn loss_and_grad(&self, ex: &Example<'_>, grad: &mut Gradient) -> f64 {
        let d = self.dim;
        grad.reset(d);
        let mut h = std::mem::take(&mut grad.h);
        self.project(ex, &mut h);
        grad.input_scale = 1.0 / ex.fan_in() as f64;

        let mut loss = 0.0;
        if let Some(target) = ex.target.filter(|_| ex.lm_weight != 0.0) {
            let w = ex.lm_weight;
            loss += w * self.output_loss(target, ex.negatives, w, &h, grad);
        }
        if let Some((label, w)) = ex.cue.filter(|&(_, w)| w != 0.0) {
            loss += w * self.cue_loss(label, w, &h, grad);
        }
        grad.h = h;
        loss
    }

    /// Unweighted output-layer loss; gradient contributions are scaled by `w`.
    fn output_loss(
        &self,
        target: usize,
        negatives: &[usize],
        w: f64,
        h: &[f64],
        grad: &mut Gradient,
    ) -> f64 {
        match &self.output {
            OutputStore::Full { weights, bias } => {
                let v = weights.rows();
                let mut logits = std::mem::take(&mut grad.logits);
                logits.clear();
                logits.extend((0..v).map(|j| bias.get(0, j) + weights.dot_row(j, h)));
                let target_logit = logits[target];
                let lse = softmax_in_place(&mut logits);
                for (j, &p) in logits.iter().enumerate() {
                    let dy = w * (p - if j == target { 1.0 } else { 0.0 });
                    grad.push_output_row(j, dy, h);
                    grad.bias.push(dy);
                    weights.axpy_row(j, dy, &mut grad.projection);
                }
                grad.logits = logits;
                lse - target_logit
            }
            OutputStore::Hierarchical { nodes, coding } => {
                let code = coding.code(target);
                let mut loss = 0.0;
                for (&bit, &point) in code.bits.iter().zip(&code.points) {
                    let node = point as usize;
                    let sign = if bit == 0 { 1.0 } else { -1.0 };
                    let x = sign * nodes.dot_row(node, h);
                    loss -= log_sigmoid(x);
                    let g = -w * sign * sigmoid(-x);
                    grad.push_output_row(node, g, h);
                    nodes.axpy_row(node, g, &mut grad.projection);
                }
                loss
            }
            OutputStore::Negative { vectors } => {
                let mut loss = 0.0;
                let x = vectors.dot_row(target, h);
                loss -= log_sigmoid(x);
                let g = -w * sigmoid(-x);
                grad.push_output_row(target, g, h);
                vectors.axpy_row(target, g, &mut grad.projection);
                for &n in negatives {
                    let x = vectors.dot_row(n, h);
                    loss -= log_sigmoid(-x);
                    let g = w * sigmoid(x);
                    grad.push_output_row(n, g, h);
                    vectors.axpy_row(n, g, &mut grad.projection);
                }
                loss
            }
        }
    }

    fn cue_loss(&self, label: usize, w: f64, h: &[f64], grad: &mut Gradient) -> f64 {
        let head = self.head.as_ref().expect("cue example without a cue head");
        let mut z = [
            head.bias.get(0, 0) + head.weights.dot_row(0, h),
            head.bias.get(0, 1) + head.weights.dot_row(1, h),
        ];
        let target_logit = z[label];
        let lse = softmax_in_place(&mut z);
        grad.head_weights.resize(2 * self.dim, 0.0);
        for (k, &p) in z.iter().enumerate() {
            let dz = w * (p - if k == label { 1.0 } else { 0.0 });
            grad.head_bias[k] = dz;
            for (c, hv) in h.iter().enumerate() {
                grad.head_weights[k * self.dim + c] = dz * hv;
            }
            head.weights.axpy_row(k, dz, &mut grad.projection);
        }
        lse - target_logit
    }

    /// `theta -= lr * grad` for the groups enabled in `mask`.
    pub fn apply(&self, ex: &Example<'_>, grad: &Gradient, lr: f64, mask: UpdateMask) {
        if mask.output {
            for (k, &row) in grad.output_rows.iter().enumerate() {
                match &self.output {
                    OutputStore::Full { weights, .. } => {
                        weights.add_to_row(row, -lr, grad.output_grad(k))
                    }
                    OutputStore::Hierarchical { nodes, .. } => {
                        nodes.add_to_row(row, -lr, grad.output_grad(k))
                    }
                    OutputStore::Negative { vectors } => {
                        vectors.add_to_row(row, -lr, grad.output_grad(k))
                    }
                }
            }
            if let OutputStore::Full { bias, .. } = &self.output {
                bias.add_to_row(0, -lr, &grad.bias);
            }
        }
        if mask.head && !grad.head_weights.is_empty() {
            if let Some(head) = &self.head {
                let d = self.dim;
                head.weights.add_to_row(0, -lr, &grad.head_weights[..d]);
                head.weights.add_to_row(1, -lr, &grad.head_weights[d..]);
                head.bias.add_to_row(0, -lr, &grad.head_bias);
            }
        }
        let step = -lr * grad.input_scale;
        if mask.words {
            for &w in ex.inputs {
                self.words.add_to_row(w, step, &grad.projection);
            }
        }
        if mask.paragraphs {
            if let (Some(p), Some(table)) = (ex.paragraph, &self.paragraphs) {
                table.add_to_row(p, step, &grad.projection);
            }
        }
    }

    /// Cueword head probability of label 1 for projection `h`.
    pub fn cue_probability(&self, h: &[f64]) -> Option<f64> {
        let head = self.head.as_ref()?;
        let z0 = head.bias.get(0, 0) + head.weights.dot_row(0, h);
        let z1 = head.bias.get(0, 1) + head.weights.dot_row(1, h);
        Some(sigmoid(z1 - z0))
    }
}
