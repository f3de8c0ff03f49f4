use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nehari_bench::{bench_grid, bench_params};
use nehari_core::energy::EnergyFunctional;
use nehari_core::nehari::{ground_state, project, SearchConfig};
use nehari_core::radial::{random_profile, GridScheme, WeightedSpace};

fn grid_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("grid");
    for n in [32, 64, 128] {
        group.bench_with_input(BenchmarkId::new("spectral-even", n), &n, |b, &n| {
            b.iter(|| bench_grid(black_box(n), GridScheme::SpectralEven))
        });
    }
    group.bench_function("uniform-fd/400", |b| {
        b.iter(|| bench_grid(black_box(400), GridScheme::UniformFd))
    });
    group.finish();
}

fn functional(n: usize, scheme: GridScheme) -> EnergyFunctional {
    let params = bench_params();
    let space = WeightedSpace::new(bench_grid(n, scheme), params.beta).unwrap();
    EnergyFunctional::full(space, &params).unwrap()
}

fn energy_and_gradient(c: &mut Criterion) {
    let fun = functional(64, GridScheme::SpectralEven);
    let grid = Arc::clone(fun.space().grid());
    let u = random_profile(&grid, &mut ChaCha8Rng::seed_from_u64(1)).scaled(1e-3);
    c.bench_function("energy/spectral-64", |b| {
        b.iter(|| fun.energy(black_box(&u)).unwrap())
    });
    c.bench_function("sobolev_gradient/spectral-64", |b| {
        b.iter(|| fun.sobolev_gradient(black_box(&u)).unwrap())
    });
    c.bench_function("project/spectral-64", |b| {
        b.iter(|| project(&fun, black_box(&u)).unwrap())
    });
}

fn ground_state_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_state");
    group.sample_size(10);
    let cfg = SearchConfig::default();
    for (label, n, scheme) in [
        ("spectral-even", 64, GridScheme::SpectralEven),
        ("uniform-fd", 400, GridScheme::UniformFd),
    ] {
        let fun = functional(n, scheme);
        group.bench_function(BenchmarkId::new(label, n), |b| {
            b.iter(|| ground_state(&fun, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    grid_construction,
    energy_and_gradient,
    ground_state_search
);
criterion_main!(benches);
