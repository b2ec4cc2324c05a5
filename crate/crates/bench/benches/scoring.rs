use std::hint::black_box;

use assim_bench::synthetic;
use assim_core::analysis::subset_stability;
use assim_core::{interest_ratios, score_triple, select_distinct};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_score_triple(c: &mut Criterion) {
    let mut group = c.benchmark_group("score_triple");
    for n in [100, 1000, 2907] {
        let triple = synthetic(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &triple, |b, t| {
            b.iter(|| {
                score_triple(
                    black_box(&t.dest),
                    black_box(&t.target),
                    black_box(&t.home),
                    50.0,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_selection(c: &mut Criterion) {
    let triple = synthetic(2907);
    let dest = interest_ratios(&triple.dest).unwrap();
    let home = interest_ratios(&triple.home).unwrap();
    c.bench_function("select_distinct/2907", |b| {
        b.iter(|| select_distinct(black_box(&dest), black_box(&home), 50.0).unwrap())
    });
}

fn bench_stability(c: &mut Criterion) {
    let triple = synthetic(2907);
    let sizes: Vec<usize> = (500..=2900).step_by(400).collect();
    let mut group = c.benchmark_group("subset_stability");
    group.sample_size(10);
    group.bench_function("2907x7sizes", |b| {
        b.iter(|| {
            subset_stability(
                &triple.dest,
                &triple.target,
                &triple.home,
                50.0,
                &sizes,
                1,
                7,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_score_triple,
    bench_selection,
    bench_stability
);
criterion_main!(benches);
