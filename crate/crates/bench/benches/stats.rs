use criterion::{criterion_group, criterion_main, Criterion};
use miniprob::stats::{ess, hpd, kde, mc_error};
use std::hint::black_box;

fn series(n: usize) -> Vec<f64> {
    // deterministic AR(1)-like sequence from a Weyl generator
    let mut x = 0.0;
    (0..n)
        .map(|i| {
            let u = (i as f64 * 0.618_033_988_749_895).fract() - 0.5;
            x = 0.8 * x + u;
            x
        })
        .collect()
}

fn posterior_stats(c: &mut Criterion) {
    let xs = series(10_000);
    c.bench_function("hpd 10k", |b| b.iter(|| hpd(black_box(&xs), 0.05).unwrap()));
    c.bench_function("mc_error 10k", |b| b.iter(|| mc_error(black_box(&xs)).unwrap()));
    c.bench_function("ess 10k", |b| b.iter(|| ess(black_box(&xs)).unwrap()));
    c.bench_function("kde 10k", |b| b.iter(|| kde(black_box(&xs))));
}

criterion_group!(benches, posterior_stats);
criterion_main!(benches);
