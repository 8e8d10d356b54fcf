use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use virusgame::{
    integrate, mixed_ne, mixer_nonmixer_ne, pure_ne, risk_profile, simulate_ctmc, Integration,
    SystemParams, ThresholdDistribution,
};
use virusgame_bench::{network, table};

fn dynamics(c: &mut Criterion) {
    let dist = ThresholdDistribution::default();
    let cfg = Integration::default();
    let params = SystemParams::small_network();
    c.bench_function("integrate/small_network", |b| {
        b.iter(|| integrate(black_box(&params), 10.0, &dist, &cfg).unwrap())
    });

    let mut group = c.benchmark_group("risk_profile");
    group.sample_size(10);
    for n in [60, 200] {
        let params = network(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &params, |b, p| {
            b.iter(|| risk_profile(p, &dist, &cfg).unwrap())
        });
    }
    group.finish();
}

fn equilibria(c: &mut Criterion) {
    let params = network(500);
    let risk = table(500);
    c.bench_function("pure_ne/500", |b| b.iter(|| pure_ne(black_box(&risk), &params)));
    c.bench_function("mixed_ne/500", |b| b.iter(|| mixed_ne(black_box(&risk), &params)));
    c.bench_function("mixer_ne/500", |b| {
        b.iter(|| mixer_nonmixer_ne(50, 70, black_box(&risk), &params))
    });
}

fn ctmc(c: &mut Criterion) {
    let params = SystemParams {
        n_nodes: 50,
        ..SystemParams::small_network()
    };
    let dist = ThresholdDistribution::default();
    let mut seed = 0;
    c.bench_function("ctmc/n50", |b| {
        b.iter(|| {
            seed += 1;
            simulate_ctmc(&params, &dist, 0, seed, 1000.0).unwrap()
        })
    });
}

criterion_group!(benches, dynamics, equilibria, ctmc);
criterion_main!(benches);
