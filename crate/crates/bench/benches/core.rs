use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sodatlas::catalog::{verify_all, verify_link};
use sodatlas::equivariant::{h1_picard, h1_picard_capped};
use sodatlas::lattice::enumerate_r_classes;
use sodatlas::SurfaceModel;
use sodatlas_bench::{rotation_on_dp6, s5_on_dp5};

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_r_classes");
    for degree in [7usize, 5, 3, 1] {
        let s = SurfaceModel::p2_blown_up(9 - degree);
        group.bench_with_input(BenchmarkId::new("minus_one", degree), &s, |b, s| {
            b.iter(|| enumerate_r_classes(black_box(s), -1).unwrap())
        });
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    c.bench_function("verify_link I-9-8", |b| b.iter(|| verify_link(black_box("I-9-8")).unwrap()));
    let mut group = c.benchmark_group("catalog");
    group.sample_size(20);
    group.bench_function("verify_all", |b| b.iter(verify_all));
    group.finish();
}

fn cohomology(c: &mut Criterion) {
    let s5 = s5_on_dp5();
    let c3 = rotation_on_dp6();
    c.bench_function("h1 S5 on dP5", |b| b.iter(|| h1_picard_capped(black_box(&s5), 120).unwrap()));
    c.bench_function("h1 C3 on dP6", |b| b.iter(|| h1_picard(black_box(&c3)).unwrap()));
}

criterion_group!(benches, enumeration, verification, cohomology);
criterion_main!(benches);
