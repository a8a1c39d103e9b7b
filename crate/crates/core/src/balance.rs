//! SMOTE oversampling in feature space.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::linalg::{squared_distance, Matrix};
use crate::sentvec::{FeatureMatrix, RowOrigin};
use crate::{par, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TargetPolicy {
    /// Grow every class to the size of the largest one.
    MatchMajority,
    /// Synthetic rows per original row, per class (may be fractional).
    /// Classes not listed are left alone.
    Multiplier(BTreeMap<Category, f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub target: TargetPolicy,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            target: TargetPolicy::MatchMajority,
            seed: 1,
        }
    }
}

/// Number of synthetic rows each class needs under `policy`, in
/// [`Category::ALL`] order.
pub fn synthetic_counts(counts: &[usize; 7], policy: &TargetPolicy) -> [usize; 7] {
    let mut need = [0usize; 7];
    match policy {
        TargetPolicy::MatchMajority => {
            let majority = counts.iter().copied().max().unwrap_or(0);
            for (n, &c) in need.iter_mut().zip(counts) {
                if c > 0 {
                    *n = majority - c;
                }
            }
        }
        TargetPolicy::Multiplier(m) => {
            for (&cat, &factor) in m {
                let c = counts[cat.index()];
                need[cat.index()] = (factor.max(0.0) * c as f64).round() as usize;
            }
        }
    }
    need
}

/// Indices of the `k` nearest other members by Euclidean distance, ties
/// broken by row index.
fn nearest_members(rows: &Matrix, members: &[usize], k: usize) -> Vec<Vec<usize>> {
    par::map_slice(members, |&i| {
        let x = rows.row(i);
        let mut others: Vec<(f64, usize)> = members
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (squared_distance(x, rows.row(j)), j))
            .collect();
        let k = k.min(others.len());
        if k < others.len() {
            others.select_nth_unstable_by(k, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.truncate(k);
        }
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        others.into_iter().map(|(_, j)| j).collect()
    })
}

/// Appends synthetic minority rows after the untouched originals. Each
/// synthetic row is `x + u * (nn - x)` with `u ~ U[0, 1)` and `nn` one of the
/// `k` nearest same-class neighbors of seed `x`; seeds receive equal quotas,
/// with the remainder spread over randomly chosen seeds.
pub fn smote(features: &FeatureMatrix, config: &SmoteConfig) -> Result<FeatureMatrix> {
    if config.k_neighbors == 0 {
        return Err(Error::InvalidConfig(
            "k_neighbors must be at least 1".into(),
        ));
    }
    let mut members: [Vec<usize>; 7] = Default::default();
    for (i, c) in features.labels.iter().enumerate() {
        members[c.index()].push(i);
    }
    let counts: [usize; 7] = std::array::from_fn(|i| members[i].len());
    let need = synthetic_counts(&counts, &config.target);

    let mut out = features.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = features.dim();
    let mut buf = vec![0.0; d];
    for cat in Category::ALL {
        let want = need[cat.index()];
        if want == 0 {
            continue;
        }
        let rows = &members[cat.index()];
        if rows.len() < 2 {
            return Err(Error::TooFewMembers {
                category: cat,
                count: rows.len(),
            });
        }
        let mut k = config.k_neighbors;
        if k >= rows.len() {
            log::warn!(
                "SMOTE: class {cat} has {} members; using k = {} instead of {k}",
                rows.len(),
                rows.len() - 1
            );
            k = rows.len() - 1;
        }
        let neighbors = nearest_members(&features.rows, rows, k);

        let base = want / rows.len();
        let mut quota = vec![base; rows.len()];
        for extra in rand::seq::index::sample(&mut rng, rows.len(), want % rows.len()) {
            quota[extra] += 1;
        }
        for (pos, &seed) in rows.iter().enumerate() {
            let x = features.rows.row(seed);
            for _ in 0..quota[pos] {
                let nn = neighbors[pos][rng.random_range(0..neighbors[pos].len())];
                let lambda: f64 = rng.random();
                let y = features.rows.row(nn);
                for c in 0..d {
                    buf[c] = x[c] + lambda * (y[c] - x[c]);
                }
                out.rows.push_row(&buf);
                out.labels.push(cat);
                let origin = match features.origins[seed] {
                    RowOrigin::Original(i) => i,
                    RowOrigin::Synthetic { seed } => seed,
                };
                out.origins.push(RowOrigin::Synthetic { seed: origin });
            }
        }
    }
    Ok(out)
}
