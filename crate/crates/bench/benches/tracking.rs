use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use homsweep::paramhom::{stream_rng, MITIGATION_STREAM};
use homsweep::{run_parallel, step1, step2_single, ParallelConfig, SweepContext};
use homsweep_bench::{grid, point, Fixture};

fn generic_solve(c: &mut Criterion) {
    let monks = Fixture::monks();
    c.bench_function("step1/monks", |b| {
        b.iter(|| step1(&monks.system, &monks.settings, black_box(3), None).unwrap())
    });
}

fn single_point(c: &mut Criterion) {
    let mut g = c.benchmark_group("step2");
    let cube = Fixture::cube();
    let src = cube.source();
    let p = point(&[0.5, -0.7]);
    g.bench_function("cube", |b| {
        b.iter(|| step2_single(&cube.system, &src, black_box(&p), &cube.settings).unwrap())
    });
    let monks = Fixture::monks();
    let src = monks.source();
    let p = point(&[4.0, 6.5, 2.5]);
    g.bench_function("monks", |b| {
        b.iter(|| step2_single(&monks.system, &src, black_box(&p), &monks.settings).unwrap())
    });
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep/cube_20x20");
    g.sample_size(10);
    let cube = Fixture::cube();
    let points = grid(2, -1.5, 1.5, 20);
    let ctx = Arc::new(SweepContext::new(cube.system.clone(), cube.settings.clone()));
    let max = std::thread::available_parallelism().map_or(1, |n| n.get()).max(2);
    for workers in [1, max] {
        let config = ParallelConfig {
            workers,
            ..ParallelConfig::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(workers), &config, |b, config| {
            b.iter(|| {
                let mut rng = stream_rng(1, MITIGATION_STREAM);
                run_parallel(&ctx, &cube.step1, &points, 3, config, &mut rng).unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, generic_solve, single_point, sweep);
criterion_main!(benches);
