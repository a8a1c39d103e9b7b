use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Category;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Rows of each category are shuffled with a seeded RNG and dealt round
/// robin. The dealing position carries over between categories so fold
/// sizes stay within one of each other as well.
pub fn stratified_folds(labels: &[Category], n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if n_folds < 2 {
        return Err(Error::InvalidConfig("at least 2 folds are required".into()));
    }
    if n_folds > labels.len() {
        return Err(Error::TooManyFolds {
            folds: n_folds,
            rows: labels.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for cat in Category::ALL {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == cat).collect();
        rows.shuffle(&mut rng);
        for i in rows {
            assignments[i] = next % n_folds;
            next += 1;
        }
    }
    Ok(FoldPlan {
        n_folds,
        assignments,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_division() {
        let labels: Vec<Category> = (0..20)
            .map(|i| if i < 10 { Category::Aim } else { Category::Own })
            .collect();
        let plan = stratified_folds(&labels, 10, 3).unwrap();
        for f in 0..10 {
            let test = plan.test_indices(f);
            assert_eq!(test.len(), 2);
            assert_eq!(
                test.iter().filter(|&&i| labels[i] == Category::Aim).count(),
                1
            );
        }
    }

    #[test]
    fn leave_one_out() {
        let labels = vec![
            Category::Aim,
            Category::Own,
            Category::Own,
            Category::Txt,
            Category::Own,
        ];
        let plan = stratified_folds(&labels, 5, 0).unwrap();
        assert_eq!(plan.fold_sizes(), vec![1; 5]);
    }

    #[test]
    fn small_category_of_191_rows() {
        let mut labels = vec![Category::Txt; 191];
        labels.extend(vec![Category::Own; 500]);
        let plan = stratified_folds(&labels, 10, 9).unwrap();
        for f in 0..10 {
            let txt = plan
                .test_indices(f)
                .iter()
                .filter(|&&i| labels[i] == Category::Txt)
                .count();
            assert!(txt == 19 || txt == 20, "{txt}");
        }
    }

    #[test]
    fn errors() {
        let labels = vec![Category::Aim; 3];
        assert!(matches!(
            stratified_folds(&labels, 1, 0),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            stratified_folds(&labels, 4, 0),
            Err(Error::TooManyFolds { folds: 4, rows: 3 })
        ));
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(
            raw in prop::collection::vec(0..7usize, 2..120),
            k in 2..12usize,
            seed in any::<u64>(),
        ) {
            prop_assume!(k <= raw.len());
            let labels: Vec<Category> = raw.iter().map(|&i| Category::from_index(i).unwrap()).collect();
            let plan = stratified_folds(&labels, k, seed).unwrap();
            prop_assert_eq!(&plan, &stratified_folds(&labels, k, seed).unwrap());
            let mut seen = vec![0; labels.len()];
            for f in 0..k {
                for i in plan.test_indices(f) {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
            for cat in Category::ALL {
                let per: Vec<usize> = (0..k)
                    .map(|f| plan.test_indices(f).iter().filter(|&&i| labels[i] == cat).count())
                    .collect();
                prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
            }
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }
}
