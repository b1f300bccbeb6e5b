use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use goldbach_core::exp_sums::{t_sum_closed, t_sum_direct};
use goldbach_core::goldbach::{r_window_direct, r_window_fft};
use goldbach_core::lambda::sieve_window;
use goldbach_core::zero_sums::{psi_zero_sum, second_difference_term};
use goldbach_core::zeros::{bundled_zeros, load_zeros};
use goldbach_core::{WindowSpec, ZeroSet};

fn zeros() -> ZeroSet {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/zeros_100k.txt");
    load_zeros(&path, 100_000).unwrap_or_else(|_| bundled_zeros())
}

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    for hi in [100_000u64, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(hi), &hi, |b, &hi| {
            b.iter(|| sieve_window(1, black_box(hi)).unwrap())
        });
    }
    g.finish();
}

fn r_window(c: &mut Criterion) {
    let mut g = c.benchmark_group("r_window");
    g.sample_size(10);
    let w = sieve_window(1, 1_100_000).unwrap();
    for (n, h) in [(10_000u64, 1000u64), (1_000_000, 100_000)] {
        let spec = WindowSpec::new(n, h).unwrap();
        g.bench_with_input(BenchmarkId::new("fft", n), &spec, |b, s| {
            b.iter(|| r_window_fft(s, &w).unwrap())
        });
    }
    let spec = WindowSpec::new(10_000, 1000).unwrap();
    g.bench_with_input(BenchmarkId::new("direct", 10_000), &spec, |b, s| {
        b.iter(|| r_window_direct(s, &w).unwrap())
    });
    g.finish();
}

fn zero_sums(c: &mut Criterion) {
    let zs = zeros();
    let mut g = c.benchmark_group("zero_sums");
    g.sample_size(10);
    g.bench_function("psi_1e6", |b| {
        b.iter(|| psi_zero_sum(black_box(1e6), &zs).unwrap())
    });
    for (n, h) in [(10_000u64, 100u64), (1_000_000, 100_000)] {
        g.bench_with_input(
            BenchmarkId::new("second_difference", format!("{n}_{h}")),
            &(n, h),
            |b, &(n, h)| b.iter(|| second_difference_term(n, h, &zs).unwrap()),
        );
    }
    g.finish();
}

fn t_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("t_sum");
    for h in [64u64, 4096] {
        let spec = WindowSpec::with_y(1_000_000, h, h as i64 / 2).unwrap();
        g.bench_with_input(BenchmarkId::new("closed", h), &spec, |b, s| {
            b.iter(|| t_sum_closed(s, black_box(0.123_456)))
        });
        g.bench_with_input(BenchmarkId::new("direct", h), &spec, |b, s| {
            b.iter(|| t_sum_direct(s, black_box(0.123_456)))
        });
    }
    g.finish();
}

criterion_group!(benches, sieve, r_window, zero_sums, t_sums);
criterion_main!(benches);
