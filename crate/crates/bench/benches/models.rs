use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use sirsnet_core::chain::{self, ChainConfig};
use sirsnet_core::meanfield::{self, endemic_fixed_point, FixedPointOptions};
use sirsnet_core::montecarlo::{self, Init, RunOptions};
use sirsnet_core::{
    generate, spectral_radius_default, ChainDistribution, ChainState, EpidemicParams, GraphKind, NodeProbs,
    NodeState,
};

fn spectral(c: &mut Criterion) {
    let g = generate(GraphKind::ErdosRenyi { n: 500, p: 0.02 }, 2024).unwrap();
    c.bench_function("spectral_radius er500", |b| b.iter(|| spectral_radius_default(black_box(&g)).unwrap()));
}

fn mean_field(c: &mut Criterion) {
    let g = generate(GraphKind::ErdosRenyi { n: 500, p: 0.02 }, 2024).unwrap();
    let p = EpidemicParams::sirs(0.07, 0.5, 1.0).unwrap();
    let start = NodeProbs::uniform(500, 0.0, 0.1);
    c.bench_function("meanfield step er500", |b| {
        b.iter(|| meanfield::step_nonlinear(black_box(&g), &p, black_box(&start)))
    });

    let k = generate(GraphKind::Complete(50), 0).unwrap();
    let p = EpidemicParams::sirs(0.05, 0.5, 0.5).unwrap();
    c.bench_function("endemic fixed point complete50", |b| {
        b.iter(|| endemic_fixed_point(black_box(&k), &p, &FixedPointOptions::default()).unwrap())
    });
}

fn exact_chain(c: &mut Criterion) {
    let g = generate(GraphKind::Cycle(8), 0).unwrap();
    let p = EpidemicParams::sirs(0.3, 0.4, 0.3).unwrap();
    let cfg = ChainConfig::exact();
    let start = ChainDistribution::point_mass(8, ChainState::uniform(8, NodeState::I));
    let mu = chain::evolve(&g, &p, &start, 6, &cfg).unwrap().distribution;
    c.bench_function("exact step cycle8 full support", |b| {
        b.iter(|| chain::step(black_box(&g), &p, black_box(&mu), &cfg).unwrap())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let g = generate(GraphKind::ErdosRenyi { n: 500, p: 0.02 }, 2024).unwrap();
    let p = EpidemicParams::sirs(0.07, 0.5, 1.0).unwrap();
    let opts = RunOptions::new(200);
    c.bench_function("mc run er500 200 steps", |b| {
        b.iter_batched(
            || 0u64,
            |seed| montecarlo::run(&g, &p, Init::Fraction(0.1), &opts, seed).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, spectral, mean_field, exact_chain, monte_carlo);
criterion_main!(benches);
