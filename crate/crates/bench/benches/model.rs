use criterion::{criterion_group, criterion_main, Criterion};

use phi_sentinel::explain::background_sample;
use phi_sentinel::gbt::train_calibrated;
use phi_sentinel::pipeline::{corpus_evidence, LabeledSet};
use phi_sentinel::synthgen::{generate_corpus, CorpusSpec};
use phi_sentinel::{builtin_library, shap_values, TrainParams};

fn labeled() -> LabeledSet {
    let corpus = generate_corpus(&CorpusSpec {
        n_datasets: 4,
        total_columns: 300,
        rows: 500,
        phi_fraction: 0.1,
        ..CorpusSpec::default()
    })
    .unwrap();
    let datasets: Vec<_> = corpus.datasets.into_iter().map(|d| d.dataset).collect();
    LabeledSet::from_evidence(&corpus_evidence(&datasets, &builtin_library(), 1000, 42)).unwrap()
}

fn model(c: &mut Criterion) {
    let set = labeled();
    let params = TrainParams::default();
    let mut group = c.benchmark_group("gbt");
    group.sample_size(10);
    group.bench_function("train_calibrated/300", |b| {
        b.iter(|| train_calibrated(&set.vectors, &set.labels, &params).unwrap())
    });
    group.finish();

    let (model, _) = train_calibrated(&set.vectors, &set.labels, &params).unwrap();
    let background = background_sample(&set.vectors, 100, 42);
    let x = &set.vectors[0];
    c.bench_function("shap/100_background", |b| {
        b.iter(|| shap_values(&model, x, &background).unwrap())
    });
}

criterion_group!(benches, model);
criterion_main!(benches);
