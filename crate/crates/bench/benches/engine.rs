use criterion::{black_box, criterion_group, criterion_main, Criterion};
use opphunt_bench::{mixed, params};
use opphunt_core::{sample_play, simulate_batch, SimConfig, Strategy};

fn engine(c: &mut Criterion) {
    let p = params();
    let s1 = Strategy::from_distribution(mixed(0.0));
    let s2 = Strategy::exponential(1.2);
    let cfg = SimConfig::default();
    c.bench_function("sample_play", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            sample_play(&s1, &s2, &p, &cfg, black_box(seed))
        })
    });
    let batch = SimConfig {
        replications: 10_000,
        ..SimConfig::default()
    };
    c.bench_function("simulate_batch_10k", |b| {
        b.iter(|| simulate_batch(&s1, &s2, &p, black_box(&batch)))
    });
    let zeno_cfg = SimConfig {
        budget: 10_000,
        ..SimConfig::default()
    };
    c.bench_function("zeno_vs_never_budget_10k", |b| {
        b.iter(|| sample_play(&Strategy::zeno(), &Strategy::Never, &p, &zeno_cfg, black_box(3)))
    });
}

criterion_group!(benches, engine);
criterion_main!(benches);
