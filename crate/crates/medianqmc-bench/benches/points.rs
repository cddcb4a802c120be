//! Point generation: gray-code streaming vs the per-point matvec
//! reference, plus the cost of drawing a fresh randomization.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use medianqmc::netgen::{
    generate_points, randomize, DirectionNumbers, GeneratingMatrixSet, RandomizationScheme,
    RandomizedNet, PointStream,
};
use medianqmc::rng::SeedTree;

const S: u32 = 10;

fn net_for(m: u32) -> RandomizedNet {
    let table = DirectionNumbers::embedded();
    let base = Arc::new(GeneratingMatrixSet::sobol(S, m, table).unwrap());
    randomize(&RandomizationScheme::Rls(base), S, m, &SeedTree::new(7)).unwrap()
}

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("points");
    for m in [8u32, 12, 16] {
        let net = net_for(m);
        group.throughput(Throughput::Elements((net.num_points()) * S as u64));
        group.bench_with_input(BenchmarkId::new("stream", m), &net, |b, net| {
            b.iter(|| black_box(PointStream::new(net).collect_block()))
        });
        group.bench_with_input(BenchmarkId::new("matvec", m), &net, |b, net| {
            b.iter(|| black_box(generate_points(net)))
        });
    }
    group.finish();
}

fn bench_randomize(c: &mut Criterion) {
    let m = 12u32;
    let table = DirectionNumbers::embedded();
    let base = Arc::new(GeneratingMatrixSet::sobol(S, m, table).unwrap());
    let tree = SeedTree::new(7);
    let mut group = c.benchmark_group("randomize");
    group.bench_function("rls", |b| {
        b.iter(|| black_box(randomize(&RandomizationScheme::Rls(base.clone()), S, m, &tree)))
    });
    group.bench_function("crd", |b| {
        b.iter(|| black_box(randomize(&RandomizationScheme::Crd, S, m, &tree)))
    });
    group.finish();
}

criterion_group!(benches, bench_generate, bench_randomize);
criterion_main!(benches);
