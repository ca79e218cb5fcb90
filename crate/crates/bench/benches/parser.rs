use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use xrepair_bench::constraint_text;
use xrepair_core::dc::render_dcs;
use xrepair_core::{fixture, parse_dcs};

fn parser(c: &mut Criterion) {
    c.bench_function("parse/corpus", |b| {
        b.iter(|| parse_dcs(black_box(fixture::CORPUS_DC)).unwrap())
    });
    let text = constraint_text(500);
    c.bench_function("parse/500_generated", |b| {
        b.iter(|| parse_dcs(black_box(&text)).unwrap())
    });
    let dcs = parse_dcs(&text).unwrap();
    c.bench_function("render/500_generated", |b| {
        b.iter(|| render_dcs(black_box(&dcs)))
    });
}

criterion_group!(benches, parser);
criterion_main!(benches);
