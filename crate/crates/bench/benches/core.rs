use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use progfree_core::search::{search_max, SearchOptions};
use progfree_core::{build_system, check_admissible, decide_cone, DigitSet, PairScheme};

fn rref(c: &mut Criterion) {
    let s = build_system(&DigitSet::interval(13, 0, 10).unwrap(), 6, PairScheme::FirstToAll).unwrap();
    c.bench_function("rref 13/6 [0,10]", |b| b.iter(|| black_box(&s.matrix).rref()));
}

fn cone(c: &mut Criterion) {
    let s = build_system(&DigitSet::interval(17, 0, 14).unwrap(), 7, PairScheme::FirstToAll).unwrap();
    c.bench_function("decide_cone 17/7 [0,14]", |b| b.iter(|| decide_cone(black_box(&s)).unwrap()));
}

fn check(c: &mut Criterion) {
    let admissible = DigitSet::interval(11, 0, 5).unwrap();
    let witness = DigitSet::interval(11, 0, 6).unwrap();
    c.bench_function("check 11/3 [0,5]", |b| b.iter(|| check_admissible(black_box(&admissible), 3).unwrap()));
    c.bench_function("check 11/3 [0,6]", |b| b.iter(|| check_admissible(black_box(&witness), 3).unwrap()));
}

fn search(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("11/4 count", |b| b.iter(|| search_max(11, 4, &SearchOptions::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, rref, cone, check, search);
criterion_main!(benches);
