use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use leadership_bench::walk;
use leadership_core::dtw::dtw_align;
use leadership_core::series::default_shift;

fn bench_lengths(c: &mut Criterion) {
    let mut group = c.benchmark_group("dtw_align");
    for len in [50, 100, 200, 400] {
        let (u, w) = (walk("u", len, 1), walk("w", len, 2));
        let band = default_shift(len);
        group.throughput(Throughput::Elements((len * (2 * band + 1)) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| dtw_align(black_box(&u), black_box(&w), band).unwrap())
        });
    }
    group.finish();
}

fn bench_bands(c: &mut Criterion) {
    let mut group = c.benchmark_group("dtw_align_band");
    let (u, w) = (walk("u", 200, 3), walk("w", 200, 4));
    for band in [1, 5, 20, 200] {
        group.bench_with_input(BenchmarkId::from_parameter(band), &band, |b, &band| {
            b.iter(|| dtw_align(black_box(&u), black_box(&w), band).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_lengths, bench_bands);
criterion_main!(benches);
