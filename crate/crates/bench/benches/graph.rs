use criterion::{criterion_group, criterion_main, Criterion};
use miniprob_bench::{linear_model, volatility_model};
use std::hint::black_box;

fn logp_and_grad(c: &mut Criterion) {
    let linear = linear_model();
    let p = linear.test_point().clone();
    c.bench_function("linear logp", |b| b.iter(|| linear.logp(black_box(&p)).unwrap()));
    c.bench_function("linear dlogp", |b| b.iter(|| linear.dlogp(black_box(&p)).unwrap()));

    let sv = volatility_model(400);
    let p = sv.test_point().clone();
    c.bench_function("volatility logp (400)", |b| b.iter(|| sv.logp(black_box(&p)).unwrap()));
    c.bench_function("volatility dlogp (400)", |b| b.iter(|| sv.dlogp(black_box(&p)).unwrap()));
}

criterion_group!(benches, logp_and_grad);
criterion_main!(benches);
