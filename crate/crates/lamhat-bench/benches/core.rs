//! Benchmarks for the hot paths: deterministic evaluation, derivation
//! checking, derivation synthesis, and simulation certificate search.

use criterion::{criterion_group, criterion_main, Criterion};
use lamhat::encodings::{check_simulation, parse_cbv, SourceTerm, SIM_SEARCH_BOUND};
use lamhat::fixtures;
use lamhat::reduction::evaluate;
use lamhat::synthesis::synthesize;
use lamhat::types::check_derivation;
use lamhat_bench::closed_corpus;
use std::hint::black_box;

fn bench_evaluate(c: &mut Criterion) {
    let t0 = fixtures::running_example();
    c.bench_function("evaluate/running-example", |b| {
        b.iter(|| evaluate(black_box(&t0), 100))
    });

    let corpus = closed_corpus(64, 5);
    c.bench_function("evaluate/generated-64", |b| {
        b.iter(|| {
            for t in &corpus {
                black_box(evaluate(black_box(t), 200));
            }
        })
    });
}

fn bench_check(c: &mut Criterion) {
    let sigma = fixtures::sigma();
    c.bench_function("check/sigma", |b| {
        b.iter(|| check_derivation(black_box(&sigma)).unwrap())
    });
}

fn bench_synthesize(c: &mut Criterion) {
    let t0 = fixtures::running_example();
    c.bench_function("synthesize/running-example", |b| {
        b.iter(|| synthesize(black_box(&t0), 100).unwrap())
    });
}

fn bench_simulate(c: &mut Criterion) {
    let src = SourceTerm::Cbv(parse_cbv("(\\x.x) ((\\y.y) (\\z.z))").unwrap());
    c.bench_function("simulate/cbv-nested-beta", |b| {
        b.iter(|| check_simulation(black_box(&src), 10, SIM_SEARCH_BOUND).unwrap())
    });
}

criterion_group!(
    benches,
    bench_evaluate,
    bench_check,
    bench_synthesize,
    bench_simulate
);
criterion_main!(benches);
