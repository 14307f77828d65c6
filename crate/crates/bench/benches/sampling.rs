use criterion::{criterion_group, criterion_main, Criterion};
use miniprob::inference::{sample, SampleConfig};
use miniprob::samplers::{Metropolis, Nuts, Slice};
use miniprob_bench::linear_model;

fn samplers(c: &mut Criterion) {
    let m = linear_model();
    let vars = ["alpha", "beta", "sigma"];
    let cfg = SampleConfig::new(200, 1).tune(100);
    let mut g = c.benchmark_group("linear, 300 iterations");
    g.sample_size(10);
    g.bench_function("nuts", |b| {
        b.iter(|| sample(&m, vec![Box::new(Nuts::new(&vars))], &cfg).unwrap())
    });
    g.bench_function("metropolis", |b| {
        b.iter(|| sample(&m, vec![Box::new(Metropolis::new(&vars))], &cfg).unwrap())
    });
    g.bench_function("slice", |b| {
        b.iter(|| sample(&m, vec![Box::new(Slice::new(&vars))], &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, samplers);
criterion_main!(benches);
