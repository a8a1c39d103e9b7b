//! Analytic gradients of every embedding objective against central
//! finite differences.

mod common;

use argzone::embeddings::objective::Example;
use common::{analytic_dense, distinct, numeric_dense, relative_error, OutKind, Setup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

fn check(
    name: &str,
    kind: OutKind,
    paragraphs: usize,
    head: bool,
    build: impl Fn(&mut ChaCha8Rng, usize) -> Owned,
) {
    for point in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + point);
        let v = rng.random_range(5..=20);
        let d = rng.random_range(2..=16);
        let setup = Setup::random(v, d, kind, paragraphs, head, &mut rng);
        let owned = build(&mut rng, v);
        let ex = owned.example();
        let params = setup.params();
        let a = analytic_dense(&params, &ex);
        let n = numeric_dense(&params, &ex, EPS);
        let err = relative_error(&a, &n);
        assert!(err < TOL, "{name} point {point}: relative error {err:e}");
        assert!(a.iter().any(|g| *g != 0.0), "{name}: gradient vanished");
    }
}

struct Owned {
    inputs: Vec<usize>,
    paragraph: Option<usize>,
    target: Option<usize>,
    negatives: Vec<usize>,
    lm_weight: f64,
    cue: Option<(usize, f64)>,
}

impl Owned {
    fn example(&self) -> Example<'_> {
        Example {
            inputs: &self.inputs,
            paragraph: self.paragraph,
            target: self.target,
            negatives: &self.negatives,
            lm_weight: self.lm_weight,
            cue: self.cue,
        }
    }
}

fn cbow(rng: &mut ChaCha8Rng, v: usize) -> Owned {
    let target = rng.random_range(0..v);
    let n = rng.random_range(1..=4);
    Owned {
        inputs: (0..n).map(|_| rng.random_range(0..v)).collect(),
        paragraph: None,
        target: Some(target),
        negatives: distinct(v, 3, target, rng),
        lm_weight: 1.0,
        cue: None,
    }
}

#[test]
fn cbow_full_softmax() {
    check("cbow/full", OutKind::Full, 0, false, cbow);
}

#[test]
fn cbow_hierarchical_softmax() {
    check("cbow/hs", OutKind::Hierarchical, 0, false, cbow);
}

#[test]
fn skipgram_negative_sampling() {
    check("skipgram/neg", OutKind::Negative, 0, false, |rng, v| {
        let center = rng.random_range(0..v);
        let target = rng.random_range(0..v);
        Owned {
            inputs: vec![center],
            paragraph: None,
            target: Some(target),
            negatives: distinct(v, 4, target, rng),
            lm_weight: 1.0,
            cue: None,
        }
    });
}

#[test]
fn skipgram_full_softmax() {
    check("skipgram/full", OutKind::Full, 0, false, |rng, v| Owned {
        inputs: vec![rng.random_range(0..v)],
        paragraph: None,
        target: Some(rng.random_range(0..v)),
        negatives: vec![],
        lm_weight: 1.0,
        cue: None,
    });
}

fn pvdm(rng: &mut ChaCha8Rng, v: usize) -> Owned {
    let mut ex = cbow(rng, v);
    ex.paragraph = Some(rng.random_range(0..3));
    if rng.random_bool(0.3) {
        ex.inputs.clear();
    }
    ex
}

#[test]
fn pvdm_negative_sampling() {
    check("pvdm/neg", OutKind::Negative, 3, false, pvdm);
}

#[test]
fn pvdm_hierarchical_softmax() {
    check("pvdm/hs", OutKind::Hierarchical, 3, false, pvdm);
}

#[test]
fn pvdm_full_softmax() {
    check("pvdm/full", OutKind::Full, 3, false, pvdm);
}

fn mixed(rng: &mut ChaCha8Rng, v: usize) -> Owned {
    let alpha: f64 = rng.random_range(0.05..0.95);
    let mut ex = cbow(rng, v);
    ex.lm_weight = alpha;
    ex.cue = Some((rng.random_range(0..2), 1.0 - alpha));
    ex
}

#[test]
fn cueword_mixed_loss_full() {
    check("bswe/full", OutKind::Full, 0, true, mixed);
}

#[test]
fn cueword_mixed_loss_negative() {
    check("bswe/neg", OutKind::Negative, 0, true, mixed);
}

#[test]
fn cueword_term_alone() {
    check("bswe/cue-only", OutKind::Negative, 0, true, |rng, v| {
        Owned {
            inputs: vec![rng.random_range(0..v)],
            paragraph: None,
            target: None,
            negatives: vec![],
            lm_weight: 0.0,
            cue: Some((rng.random_range(0..2), 0.7)),
        }
    });
}

#[test]
fn sgd_step_moves_against_the_gradient() {
    use argzone::embeddings::objective::{Gradient, UpdateMask};
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let setup = Setup::random(8, 5, OutKind::Full, 2, true, &mut rng);
    let owned = mixed(&mut rng, 8);
    let mut owned = owned;
    owned.paragraph = Some(1);
    let ex = owned.example();
    let params = setup.params();
    let before: Vec<f64> = common::coordinates(&params)
        .iter()
        .map(|&(n, r, c, _)| value(&params, n, r, c))
        .collect();
    let a = analytic_dense(&params, &ex);
    let mut g = Gradient::new(5);
    params.loss_and_grad(&ex, &mut g);
    let lr = 0.01;
    params.apply(&ex, &g, lr, UpdateMask::ALL);
    let after: Vec<f64> = common::coordinates(&params)
        .iter()
        .map(|&(n, r, c, _)| value(&params, n, r, c))
        .collect();
    for i in 0..a.len() {
        assert!(
            (after[i] - (before[i] - lr * a[i])).abs() < 1e-12,
            "coordinate {i}"
        );
    }
}

fn value(
    params: &argzone::embeddings::objective::Params<'_>,
    name: &str,
    r: usize,
    c: usize,
) -> f64 {
    use argzone::embeddings::objective::OutputStore;
    match name {
        "words" => params.words.get(r, c),
        "paragraphs" => params.paragraphs.as_ref().unwrap().get(r, c),
        "out" => match &params.output {
            OutputStore::Full { weights, .. } => weights.get(r, c),
            OutputStore::Hierarchical { nodes, .. } => nodes.get(r, c),
            OutputStore::Negative { vectors } => vectors.get(r, c),
        },
        "bias" => match &params.output {
            OutputStore::Full { bias, .. } => bias.get(r, c),
            _ => unreachable!(),
        },
        "head" => params.head.as_ref().unwrap().weights.get(r, c),
        "head_bias" => params.head.as_ref().unwrap().bias.get(r, c),
        _ => unreachable!(),
    }
}
