use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsklim_core::integrator::Propagator;
use nsklim_core::model::{nsk_rhs, Alpha, NskParams, NskState};
use nsklim_core::spectral::{Parity, ScalarField, SlabGrid, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state(grid: SlabGrid) -> NskState {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut f = |p| ScalarField::random(grid, p, 4.0, &mut rng).dealiased().scale(0.1);
    let u = VectorField::new(f(Parity::Even), f(Parity::Even), f(Parity::Odd));
    NskState::new(f(Parity::Even), u, f(Parity::Even), 0.0).unwrap()
}

/// Pools to compare: one worker against the default width.
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let width = default.current_num_threads();
    vec![
        ("sequential".into(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        (format!("parallel-{width}"), default),
    ]
}

fn kernels(c: &mut Criterion) {
    let grid = SlabGrid::with_resolution(64, 8).unwrap();
    let s = state(grid);
    let params = NskParams::new(0.1, Alpha::One).unwrap();
    let prop = Propagator::new(grid, &params);
    let packed = s.pack();
    let mut group = c.benchmark_group("kernels_64x64x8");
    group.sample_size(20);
    for (label, pool) in pools() {
        group.bench_function(BenchmarkId::new("transform", &label), |b| {
            pool.install(|| b.iter(|| black_box(s.q.to_physical())))
        });
        group.bench_function(BenchmarkId::new("nsk_rhs", &label), |b| {
            pool.install(|| b.iter(|| black_box(nsk_rhs(&s, &params).unwrap())))
        });
        group.bench_function(BenchmarkId::new("propagator", &label), |b| {
            pool.install(|| b.iter(|| black_box(prop.apply(0.01, &packed))))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
