use criterion::{black_box, criterion_group, criterion_main, Criterion};
use infoq::{
    equilibrium_bisect, equilibrium_closed_form, find_thresholds, optimal_access_fee,
    optimize_info_fee_heuristic, optimize_info_fee_refine, simulate, SimConfig,
};
use infoq_bench::{interior_market, reference_market};

fn equilibrium(c: &mut Criterion) {
    let params = interior_market();
    c.bench_function("equilibrium_closed_form", |b| {
        b.iter(|| equilibrium_closed_form(black_box(&params)).unwrap())
    });
    c.bench_function("equilibrium_bisect", |b| {
        b.iter(|| equilibrium_bisect(black_box(&params)).unwrap())
    });
}

fn pricing(c: &mut Criterion) {
    let params = reference_market(1.0);
    c.bench_function("optimal_access_fee", |b| {
        b.iter(|| optimal_access_fee(black_box(&params)).unwrap())
    });
    c.bench_function("info_fee_heuristic_step_0.01", |b| {
        b.iter(|| optimize_info_fee_heuristic(black_box(&params), 0.01, 20.0).unwrap())
    });
    let patient = reference_market(20.0);
    c.bench_function("info_fee_refine", |b| {
        b.iter(|| optimize_info_fee_refine(black_box(&patient), 1e-9).unwrap())
    });
}

fn policy(c: &mut Criterion) {
    let params = reference_market(1.0);
    c.bench_function("policy_thresholds_50", |b| {
        b.iter(|| find_thresholds(black_box(&params), 0.1, 30.0, 50).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let config = SimConfig::new(interior_market(), 0.5, 100_000, 7);
    let mut group = c.benchmark_group("simulation");
    group.sample_size(20);
    group.bench_function("simulate_1e5_events", |b| {
        b.iter(|| simulate(black_box(&config)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, equilibrium, pricing, policy, simulation);
criterion_main!(benches);
