use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use phi_sentinel::pipeline::dataset_evidence;
use phi_sentinel::synthgen::{generate_column, Generator};
use phi_sentinel::{builtin_library, compute_metafeatures, sample_column, screen_column, Column, Dataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn column(generator: Generator, format: &str, rows: usize) -> Column {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    Column::new(generator.slug(), generate_column(generator, format, rows, 0.05, &mut rng))
}

fn kinds() -> Vec<(Generator, &'static str)> {
    [Generator::Ssn, Generator::LabLognormal, Generator::Category]
        .into_iter()
        .map(|g| (g, g.formats()[0]))
        .collect()
}

fn metafeatures(c: &mut Criterion) {
    let mut group = c.benchmark_group("metafeatures");
    group.throughput(Throughput::Elements(1000));
    for (g, f) in kinds() {
        let sample = sample_column(&column(g, f, 5000), 1000, 42).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(g.slug()), &sample, |b, s| {
            b.iter(|| compute_metafeatures(s).unwrap())
        });
    }
    group.finish();
}

fn regex_screen(c: &mut Criterion) {
    let library = builtin_library();
    let mut group = c.benchmark_group("regex_screen");
    group.throughput(Throughput::Elements(1000));
    for (g, f) in kinds() {
        let sample = sample_column(&column(g, f, 5000), 1000, 42).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(g.slug()), &sample, |b, s| {
            b.iter(|| screen_column(s, &library).unwrap())
        });
    }
    group.finish();
}

fn evidence(c: &mut Criterion) {
    let library = builtin_library();
    let columns: Vec<Column> = kinds().into_iter().map(|(g, f)| column(g, f, 5000)).collect();
    let ds = Dataset::new("bench", columns).unwrap();
    c.bench_function("dataset_evidence/3x5000", |b| {
        b.iter(|| dataset_evidence(&ds, &library, 1000, 42))
    });
}

criterion_group!(benches, metafeatures, regex_screen, evidence);
criterion_main!(benches);
