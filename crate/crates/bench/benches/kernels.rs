use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linform_bench::{equation, function, set, space};
use linform_core::counting::count_solutions_in_set;
use linform_core::forge::{forge_nonsidorenko_odd, forge_uncommon_even};
use linform_core::fourier::{lambda_spectral, transform};
use linform_core::refuter::{exhaustive_common_search, exhaustive_sidorenko_search};
use linform_core::{Budget, SearchOptions};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for (q, n) in [(2u64, 12usize), (3, 7), (5, 5), (9, 3), (16, 3)] {
        let f = function(&space(q, n));
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("q{q}n{n}")),
            &f,
            |b, f| b.iter(|| transform(black_box(f), Budget::unlimited()).unwrap()),
        );
    }
    group.finish();

    let eq = equation("L=1,2,3,4; q=5");
    let f = function(&space(5, 4));
    c.bench_function("lambda_spectral/q5n4k4", |b| {
        b.iter(|| lambda_spectral(black_box(&eq), 0, black_box(&f), Budget::unlimited()).unwrap())
    });
}

fn counting(c: &mut Criterion) {
    let mut group = c.benchmark_group("count");
    for (spec, q, n) in [
        ("L=1,-2,1; q=5", 5u64, 3usize),
        ("L=1,1,1,1; q=3", 3, 4),
        ("L=1,1,1; q=2", 2, 8),
    ] {
        let eq = equation(spec);
        let a = set(&space(q, n));
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{spec} n={n}")),
            &a,
            |b, a| {
                b.iter(|| {
                    count_solutions_in_set(black_box(&eq), 0, black_box(a), Budget::unlimited())
                        .unwrap()
                })
            },
        );
    }
    group.finish();
}

fn refuter(c: &mut Criterion) {
    let mut group = c.benchmark_group("refute");
    group.sample_size(10);
    let eq = equation("L=1,-2,1; q=2");
    group.bench_function("sidorenko/q2n4k3", |b| {
        b.iter(|| {
            exhaustive_sidorenko_search(black_box(&eq), 0, 4, SearchOptions::default()).unwrap()
        })
    });
    let eq = equation("L=1,1,1,1; q=5");
    group.bench_function("common/q5n1k4", |b| {
        b.iter(|| exhaustive_common_search(black_box(&eq), 0, 1, SearchOptions::default()).unwrap())
    });
    let eq = equation("L=1,1,1; q=3");
    group.bench_function("common/q3n2k3", |b| {
        b.iter(|| exhaustive_common_search(black_box(&eq), 0, 2, SearchOptions::default()).unwrap())
    });
    group.finish();
}

fn forge(c: &mut Criterion) {
    let eq = equation("L=1,1,1,1; q=7");
    c.bench_function("forge/uncommon_q7k4", |b| {
        b.iter(|| forge_uncommon_even(black_box(&eq), 1, 10_000).unwrap())
    });
    let eq = equation("L=1,2,3,4,5; q=9");
    c.bench_function("forge/nonsidorenko_q9k5", |b| {
        b.iter(|| forge_nonsidorenko_odd(black_box(&eq)).unwrap())
    });
}

criterion_group!(benches, transforms, counting, refuter, forge);
criterion_main!(benches);
