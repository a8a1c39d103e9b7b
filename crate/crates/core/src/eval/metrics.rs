use serde::{Deserialize, Serialize};

/// Square count matrix; rows are gold classes, columns predictions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    n: usize,
    counts: Vec<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Prf {
        Prf {
            precision,
            recall,
            f1: ratio(2.0 * precision * recall, precision + recall),
        }
    }
}

impl ConfusionCounts {
    pub fn new(n: usize) -> Self {
        ConfusionCounts {
            n,
            counts: vec![0; n * n],
        }
    }

    /// Row-major `n x n` counts.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "confusion matrix must be square"
        );
        ConfusionCounts {
            n,
            counts: rows.concat(),
        }
    }

    pub fn classes(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, gold: usize, predicted: usize) {
        self.counts[gold * self.n + predicted] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn get(&self, gold: usize, predicted: usize) -> u64 {
        self.counts[gold * self.n + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn gold_total(&self, c: usize) -> u64 {
        (0..self.n).map(|p| self.get(c, p)).sum()
    }

    pub fn predicted_total(&self, c: usize) -> u64 {
        (0..self.n).map(|g| self.get(g, c)).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let diag: u64 = (0..self.n).map(|c| self.get(c, c)).sum();
        ratio(diag as f64, self.total() as f64)
    }

    /// Recall with true positives and false negatives summed over classes.
    pub fn micro_recall(&self) -> f64 {
        let tp: u64 = (0..self.n).map(|c| self.get(c, c)).sum();
        let fneg: u64 = (0..self.n)
            .map(|c| self.gold_total(c) - self.get(c, c))
            .sum();
        ratio(tp as f64, (tp + fneg) as f64)
    }
}

/// Per-class precision, recall and F; any 0/0 is 0.
pub fn prf_from_confusion(counts: &ConfusionCounts) -> Vec<Prf> {
    (0..counts.classes())
        .map(|c| {
            let tp = counts.get(c, c) as f64;
            Prf::new(
                ratio(tp, counts.predicted_total(c) as f64),
                ratio(tp, counts.gold_total(c) as f64),
            )
        })
        .collect()
}
