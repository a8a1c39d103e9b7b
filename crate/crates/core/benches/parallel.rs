//! Each workload runs inside a one-thread rayon pool and inside the default
//! pool. Built with `--no-default-features` both sides are sequential.

use argzone::balance::{smote, SmoteConfig};
use argzone::classify::ClassifierConfig;
use argzone::corpus::{build_vocabulary, Category, LabeledSentence, Sentence};
use argzone::embeddings::{train_word2vec, EmbeddingModel, InferConfig, TrainingConfig};
use argzone::eval::{cross_validate, CvConfig, ReportConfig};
use argzone::sentvec::{vectorize_dataset, FeatureMatrix, Method};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

fn corpus(n: usize) -> Vec<LabeledSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|i| {
            let c = if i % 3 == 0 {
                rng.random_range(0..7)
            } else {
                2
            };
            let words: Vec<String> = (0..12)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        format!("k{c}w{}", rng.random_range(0..40))
                    } else {
                        format!("shared{}", rng.random_range(0..200))
                    }
                })
                .collect();
            LabeledSentence {
                sentence: Sentence::from_text(&words.join(" "), i.to_string()),
                category: Category::from_index(c).unwrap(),
            }
        })
        .collect()
}

fn pools() -> [(&'static str, ThreadPool); 2] {
    [
        (
            "sequential",
            rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap(),
        ),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn model(data: &[LabeledSentence], workers: usize) -> EmbeddingModel {
    let sentences: Vec<Sentence> = data.iter().map(|d| d.sentence.clone()).collect();
    let vocab = build_vocabulary(&sentences, 1, false).unwrap();
    let config = TrainingConfig {
        dim: 50,
        min_count: 1,
        epochs: 1,
        workers,
        ..TrainingConfig::default()
    };
    train_word2vec(&sentences, &vocab, &config).unwrap()
}

fn features(data: &[LabeledSentence], m: &EmbeddingModel) -> FeatureMatrix {
    vectorize_dataset(m, data, Method::Avgwvec, &InferConfig::default()).unwrap()
}

fn benches(c: &mut Criterion) {
    let data = corpus(3000);
    let m = model(&data, 1);
    let f = features(&data, &m);
    let pools = pools();
    let threads = pools[1].1.current_num_threads();

    let mut g = c.benchmark_group("training");
    g.sample_size(10);
    for (name, pool) in &pools {
        let workers = pool.current_num_threads();
        g.bench_function(BenchmarkId::new(*name, workers), |b| {
            b.iter(|| pool.install(|| model(&data, workers)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("vectorize");
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::new(*name, threads), |b| {
            b.iter(|| pool.install(|| features(&data, &m)))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("smote");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::new(*name, threads), |b| {
            b.iter(|| pool.install(|| smote(&f, &SmoteConfig::default()).unwrap()))
        });
    }
    g.finish();

    let cv = CvConfig {
        classifier: ClassifierConfig {
            epochs: 5,
            ..Default::default()
        },
        ..CvConfig::default()
    };
    let mut g = c.benchmark_group("cross_validation");
    g.sample_size(10);
    for (name, pool) in &pools {
        g.bench_function(BenchmarkId::new(*name, threads), |b| {
            b.iter(|| pool.install(|| cross_validate(&f, &cv, ReportConfig::default()).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(parallel, benches);
criterion_main!(parallel);
