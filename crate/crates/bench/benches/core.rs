use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;
use regenrad::chain::{canonical_doeblin_chain, simulate};
use regenrad::classes::{covering_number_values, CoverMode};
use regenrad::kde::{kde_evaluate, Kernel};
use regenrad::metropolis::builtin_mh_spec;
use regenrad::rademacher::rademacher_from_values;
use regenrad::regeneration::{extract_blocks, simulate_split_retrospective};
use regenrad::stream_rng;

fn simulation(c: &mut Criterion) {
    let model = canonical_doeblin_chain(0.3).unwrap();
    c.bench_function("doeblin simulate 1e4", |b| b.iter(|| simulate(&model, black_box(10_000), 1).unwrap()));
    c.bench_function("doeblin split 1e4", |b| {
        b.iter(|| extract_blocks(&simulate_split_retrospective(&model, black_box(10_000), 1).unwrap()).unwrap())
    });
    let setup = builtin_mh_spec("mh-uniform-1d").unwrap().build().unwrap();
    let mh = setup.model().unwrap();
    c.bench_function("mh split 1e4", |b| b.iter(|| simulate_split_retrospective(&mh, black_box(10_000), 1).unwrap()));
}

fn certificate(c: &mut Criterion) {
    let spec = builtin_mh_spec("mh-uniform-2d").unwrap();
    c.bench_function("certificate 2d", |b| b.iter(|| black_box(&spec).build().unwrap()));
}

fn rademacher(c: &mut Criterion) {
    let mut rng = stream_rng(3, 0);
    let values: Vec<Vec<f64>> = (0..10).map(|_| (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    c.bench_function("rademacher mc 10x1000 n_mc 1e3", |b| {
        b.iter(|| rademacher_from_values(black_box(&values), 1000, 5).unwrap())
    });
}

fn covering(c: &mut Criterion) {
    let mut rng = stream_rng(4, 0);
    let values: Vec<Vec<f64>> = (0..12).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let weights = vec![0.2; 5];
    c.bench_function("exact cover 12 members", |b| {
        b.iter(|| covering_number_values(black_box(&values), &weights, 0.5, CoverMode::Exact).unwrap())
    });
    c.bench_function("greedy cover 12 members", |b| {
        b.iter(|| covering_number_values(black_box(&values), &weights, 0.5, CoverMode::Greedy).unwrap())
    });
}

fn kde(c: &mut Criterion) {
    let model = canonical_doeblin_chain(0.3).unwrap();
    let traj = simulate(&model, 10_000, 2).unwrap();
    let kernel = Kernel::box_1d();
    c.bench_function("kde 1e4 points x 200", |b| {
        b.iter(|| {
            (0..200)
                .map(|i| kde_evaluate(black_box(&traj.states), &kernel, 0.05, &[i as f64 / 200.0]).unwrap())
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, simulation, certificate, rademacher, covering, kde);
criterion_main!(benches);
