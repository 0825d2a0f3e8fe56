use criterion::{criterion_group, criterion_main, Criterion};
use flatdisc_bench::{chains, running_example};
use flatdisc_core::flatness::{advanced_test, simple_test, verify_parametrization};

fn running(c: &mut Criterion) {
    let s = running_example();
    let mut g = c.benchmark_group("running_example");
    g.sample_size(10);
    g.bench_function("simple_test", |b| b.iter(|| simple_test(&s, None)));
    g.bench_function("advanced_test", |b| b.iter(|| advanced_test(&s, None)));
    let p = advanced_test(&s, None).parametrization.expect("flat");
    g.bench_function("verify", |b| b.iter(|| verify_parametrization(&s, &p)));
    g.finish();
}

fn chain_family(c: &mut Criterion) {
    let mut g = c.benchmark_group("chains");
    g.sample_size(10);
    for lengths in [vec![6], vec![3, 3], vec![2, 2, 2]] {
        let s = chains(&lengths);
        g.bench_function(format!("simple {lengths:?}"), |b| b.iter(|| simple_test(&s, None)));
        g.bench_function(format!("advanced {lengths:?}"), |b| b.iter(|| advanced_test(&s, None)));
    }
    g.finish();
}

criterion_group!(benches, running, chain_family);
criterion_main!(benches);
