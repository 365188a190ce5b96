//! Benchmark groups for the separation hot paths.

use criterion::{BenchmarkId, Criterion, Throughput};
use std::hint::black_box;
use szt_core::{
    center_whiten, comb_forward, comb_inverse_zero, cumulant_matrices, gen_qpsk, jade_separate,
    mix, random_mixer, szt_bss_separate, DataMatrix, JadeOptions, MultiSignal, Seed, SztParams,
};

fn qpsk_pair(n: usize) -> MultiSignal {
    MultiSignal::new(vec![
        gen_qpsk(n, 8, 0.1, Seed(1)).unwrap(),
        gen_qpsk(n, 8, 0.15, Seed(2)).unwrap(),
    ])
    .unwrap()
}

pub fn comb(c: &mut Criterion) {
    let mut group = c.benchmark_group("comb");
    for &n in &[10_000usize, 200_000] {
        let s = gen_qpsk(n, 8, 0.1, Seed(3)).unwrap();
        let p = SztParams::new(64, 0.95).unwrap();
        let fwd = comb_forward(&s, &p).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::new("forward", n), &s, |b, s| {
            b.iter(|| comb_forward(black_box(s), &p).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("inverse", n), &fwd, |b, f| {
            b.iter(|| comb_inverse_zero(black_box(f), &p).unwrap())
        });
    }
    group.finish();
}

pub fn jade(c: &mut Criterion) {
    let mut group = c.benchmark_group("jade");
    for &k in &[2usize, 4] {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                gen_qpsk(20_000, 8, 0.05 + 0.08 * i as f64, Seed(10 + i as u64))
                    .unwrap()
                    .into_samples()
            })
            .collect();
        let sources = MultiSignal::from_rows(rows).unwrap();
        let mixed = mix(&random_mixer(k, 1, Seed(5)).unwrap(), &sources).unwrap();
        let x = DataMatrix::new(
            mixed
                .into_channels()
                .into_iter()
                .map(|s| s.into_samples())
                .collect(),
        )
        .unwrap();
        let white = center_whiten(&x).unwrap().whitened;
        group.bench_with_input(BenchmarkId::new("cumulants", k), &white, |b, w| {
            b.iter(|| cumulant_matrices(black_box(w)))
        });
        group.bench_with_input(BenchmarkId::new("separate", k), &x, |b, x| {
            b.iter(|| jade_separate(black_box(x), JadeOptions::default()).unwrap())
        });
    }
    group.finish();
}

pub fn pipeline(c: &mut Criterion) {
    let sources = qpsk_pair(20_000);
    let mixtures = mix(&random_mixer(2, 2, Seed(6)).unwrap(), &sources).unwrap();
    let p = SztParams::new(64, 0.97).unwrap();
    c.bench_function("szt_bss_separate/20k", |b| {
        b.iter(|| szt_bss_separate(black_box(&mixtures), &p, JadeOptions::default(), 1e-6).unwrap())
    });
}

pub fn benchmarks(c: &mut Criterion) {
    comb(c);
    jade(c);
    pipeline(c);
}
