use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use netsimp::evaluation::{chatterjee_xi, compare_networks, GridParams, Metric, MetricSeries};
use netsimp::fixtures::synthetic_city;
use netsimp::pipeline::{simplify, SimplifyParams};
use netsimp::topology::{fix_topology, ConsolidationParams};

fn bench_simplify(c: &mut Criterion) {
    let mut g = c.benchmark_group("simplify");
    g.sample_size(10);
    for n in [10, 30, 55] {
        let net = synthetic_city(n);
        g.bench_with_input(BenchmarkId::from_parameter(net.edge_count()), &net, |b, net| {
            b.iter(|| simplify(net, &SimplifyParams::default()).unwrap())
        });
    }
    g.finish();
}

fn bench_topology(c: &mut Criterion) {
    let net = synthetic_city(30);
    c.bench_function("fix_topology", |b| {
        b.iter(|| fix_topology(&net, &ConsolidationParams::default()))
    });
}

fn bench_evaluation(c: &mut Criterion) {
    let net = synthetic_city(30);
    let (simple, _) = simplify(&net, &SimplifyParams::default()).unwrap();
    c.bench_function("compare_networks", |b| {
        b.iter(|| compare_networks(&net, &simple, &GridParams::default()).unwrap())
    });

    let mut rng = StdRng::seed_from_u64(7);
    let p: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
    let q: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
    let (p, q) = (
        MetricSeries::from_values(Metric::EdgeCount, &p),
        MetricSeries::from_values(Metric::EdgeCount, &q),
    );
    c.bench_function("chatterjee_xi_10k", |b| b.iter(|| chatterjee_xi(&p, &q).unwrap()));
}

criterion_group!(benches, bench_simplify, bench_topology, bench_evaluation);
criterion_main!(benches);
