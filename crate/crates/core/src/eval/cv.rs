use serde::{Deserialize, Serialize};

use super::folds::{stratified_folds, FoldPlan};
use super::metrics::{prf_from_confusion, ConfusionCounts, Prf};
use crate::balance::{smote, SmoteConfig};
use crate::classify::{train_classifier, ClassifierConfig};
use crate::corpus::{Category, LabeledSentence};
use crate::cuebase::{cueword_classify, CategoryLexicon};
use crate::embeddings::{EmbeddingModel, InferConfig};
use crate::sentvec::{vectorize_dataset, FeatureMatrix, Method, RowOrigin};
use crate::{par, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmotePlacement {
    None,
    /// Oversample each training split; test folds hold only real rows.
    #[default]
    WithinFolds,
    /// Oversample the whole dataset before splitting. Synthetic rows then
    /// leak into test folds; kept for comparison with older setups.
    BeforeSplit,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Averaging {
    /// Mean of the per-fold metrics.
    #[default]
    PerFold,
    /// Metrics of the confusion matrix summed over folds.
    Pooled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_folds: usize,
    pub seed: u64,
    pub placement: SmotePlacement,
    pub smote: SmoteConfig,
    pub classifier: ClassifierConfig,
    pub averaging: Averaging,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            n_folds: 10,
            seed: 1,
            placement: SmotePlacement::WithinFolds,
            smote: SmoteConfig::default(),
            classifier: ClassifierConfig::default(),
            averaging: Averaging::PerFold,
        }
    }
}

/// Configuration echoed into reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    /// Row label in report tables.
    pub label: String,
    pub model: String,
    pub corpus: String,
    pub dim: usize,
    pub placement: SmotePlacement,
    pub averaging: Averaging,
    pub n_folds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    /// Indexed by [`Category::index`].
    pub confusion: ConfusionCounts,
    pub metrics: Vec<Prf>,
    pub test_rows: usize,
    pub synthetic_test_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: ReportConfig,
    pub folds: Vec<FoldResult>,
    /// Categories that occur in the evaluated data.
    pub present: Vec<Category>,
    pub per_fold_mean: Vec<Prf>,
    pub pooled: Vec<Prf>,
}

impl EvaluationReport {
    /// Averaged metrics for `category` under the configured averaging, or
    /// `None` if it never occurs.
    pub fn metric(&self, category: Category) -> Option<Prf> {
        if !self.present.contains(&category) {
            return None;
        }
        let table = match self.config.averaging {
            Averaging::PerFold => &self.per_fold_mean,
            Averaging::Pooled => &self.pooled,
        };
        Some(table[category.index()])
    }

    /// Mean F over present categories.
    pub fn macro_f1(&self) -> f64 {
        let fs: Vec<f64> = self
            .present
            .iter()
            .filter_map(|&c| self.metric(c))
            .map(|p| p.f1)
            .collect();
        fs.iter().sum::<f64>() / fs.len().max(1) as f64
    }

    pub fn synthetic_test_rows(&self) -> usize {
        self.folds.iter().map(|f| f.synthetic_test_rows).sum()
    }
}

fn assemble(
    labels: &[Category],
    origins: &[RowOrigin],
    plan: &FoldPlan,
    config: ReportConfig,
    predict: impl Fn(usize, &[usize], &[usize]) -> Result<Vec<Category>> + Sync,
) -> Result<EvaluationReport> {
    let folds = par::try_map_indexed(plan.n_folds, |f| {
        let test = plan.test_indices(f);
        let train = plan.train_indices(f);
        let predicted = predict(f, &train, &test)?;
        let mut confusion = ConfusionCounts::new(7);
        for (&i, p) in test.iter().zip(&predicted) {
            confusion.add(labels[i].index(), p.index());
        }
        Ok::<_, Error>(FoldResult {
            metrics: prf_from_confusion(&confusion),
            confusion,
            test_rows: test.len(),
            synthetic_test_rows: test.iter().filter(|&&i| origins[i].is_synthetic()).count(),
        })
    })?;

    let mut present_mask = [false; 7];
    for c in labels {
        present_mask[c.index()] = true;
    }
    let present = Category::ALL
        .into_iter()
        .filter(|c| present_mask[c.index()])
        .collect();
    let k = folds.len() as f64;
    let per_fold_mean = (0..7)
        .map(|c| {
            let sum = |g: fn(&Prf) -> f64| folds.iter().map(|f| g(&f.metrics[c])).sum::<f64>() / k;
            Prf {
                precision: sum(|p| p.precision),
                recall: sum(|p| p.recall),
                f1: sum(|p| p.f1),
            }
        })
        .collect();
    let mut total = ConfusionCounts::new(7);
    for f in &folds {
        total.merge(&f.confusion);
    }
    Ok(EvaluationReport {
        config,
        folds,
        present,
        per_fold_mean,
        pooled: prf_from_confusion(&total),
    })
}

fn echo(mut config: ReportConfig, cv: &CvConfig, dim: usize) -> ReportConfig {
    config.dim = dim;
    config.placement = cv.placement;
    config.averaging = cv.averaging;
    config.n_folds = cv.n_folds;
    config
}

/// Stratified k-fold evaluation of the logistic classifier on precomputed
/// features. Fold `f` seeds SMOTE and the classifier with `seed + f`.
pub fn cross_validate(
    features: &FeatureMatrix,
    cv: &CvConfig,
    config: ReportConfig,
) -> Result<EvaluationReport> {
    let data = match cv.placement {
        SmotePlacement::BeforeSplit => smote(features, &cv.smote)?,
        _ => features.clone(),
    };
    let plan = stratified_folds(&data.labels, cv.n_folds, cv.seed)?;
    let config = echo(config, cv, features.dim());
    assemble(
        &data.labels,
        &data.origins,
        &plan,
        config,
        |f, train, test| {
            let mut train = data.select(train);
            if cv.placement == SmotePlacement::WithinFolds {
                let smote_cfg = SmoteConfig {
                    seed: cv.smote.seed.wrapping_add(f as u64),
                    ..cv.smote.clone()
                };
                train = smote(&train, &smote_cfg)?;
            }
            let clf_cfg = ClassifierConfig {
                seed: cv.classifier.seed.wrapping_add(f as u64),
                ..cv.classifier.clone()
            };
            let model = train_classifier(&train, &clf_cfg)?;
            test.iter()
                .map(|&i| model.predict(data.rows.row(i)).map(|(c, _)| c))
                .collect()
        },
    )
}

/// Vectorizes `data` with a fixed pre-trained model and cross-validates.
/// Vectors do not depend on the split, so they are computed once.
pub fn run_cv(
    model: &EmbeddingModel,
    data: &[LabeledSentence],
    method: Method,
    infer: &InferConfig,
    cv: &CvConfig,
    config: ReportConfig,
) -> Result<EvaluationReport> {
    let features = vectorize_dataset(model, data, method, infer)?;
    cross_validate(&features, cv, config)
}

/// The cueword baseline scored on the same stratified folds.
pub fn evaluate_cuewords(
    data: &[LabeledSentence],
    lexicon: &CategoryLexicon,
    default: Category,
    cv: &CvConfig,
    mut config: ReportConfig,
) -> Result<EvaluationReport> {
    let labels: Vec<Category> = data.iter().map(|d| d.category).collect();
    let origins: Vec<RowOrigin> = (0..data.len()).map(RowOrigin::Original).collect();
    let plan = stratified_folds(&labels, cv.n_folds, cv.seed)?;
    config.placement = SmotePlacement::None;
    config.averaging = cv.averaging;
    config.n_folds = cv.n_folds;
    assemble(&labels, &origins, &plan, config, |_, _, test| {
        Ok(test
            .iter()
            .map(|&i| cueword_classify(&data[i].sentence, lexicon, default))
            .collect())
    })
}
