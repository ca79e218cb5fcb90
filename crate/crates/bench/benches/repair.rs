use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use xrepair_bench::stacked_fixture;
use xrepair_core::{fixture, reference_repair, violations};

fn repair(c: &mut Criterion) {
    let dcs = fixture::constraints();
    let mut group = c.benchmark_group("reference_repair");
    for copies in [1, 4, 16] {
        let table = stacked_fixture(copies);
        group.bench_with_input(
            BenchmarkId::from_parameter(table.row_count()),
            &table,
            |b, t| b.iter(|| reference_repair(black_box(&dcs), black_box(t)).unwrap()),
        );
    }
    group.finish();

    let table = stacked_fixture(16);
    c.bench_function("violations/C1/96_rows", |b| {
        b.iter(|| violations(black_box(&dcs[0]), black_box(&table)).unwrap())
    });
}

criterion_group!(benches, repair);
criterion_main!(benches);
