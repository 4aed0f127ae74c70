use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use areabound::fuzz::{run_fuzz, FuzzConfig};
use areabound::mesh::{disk_mesh, jitter_along, minimize, DiskMeshSpec, SolverConfig};
use areabound::surfaces::Catenoid;
use areabound::verify::{verify, VerifyConfig};
use areabound::{point, CalibrationField, TangentFrame};

fn field_eval(c: &mut Criterion) {
    let field = CalibrationField::new(point(&[0.3, -0.2, 0.1, 0.0]), 3).unwrap();
    let frame = TangentFrame::random(4, 3, 7).unwrap();
    let x = point(&[-0.1, 0.4, 0.2, 0.5]);
    c.bench_function("field eval", |b| b.iter(|| field.eval(black_box(&x)).unwrap()));
    c.bench_function("field deficit", |b| b.iter(|| field.deficit(black_box(&x), &frame).unwrap()));
    let log_field = CalibrationField::new(point(&[0.3, -0.2, 0.1]), 2).unwrap();
    let x3 = point(&[-0.1, 0.4, 0.2]);
    c.bench_function("field eval k=2", |b| b.iter(|| log_field.eval(black_box(&x3)).unwrap()));
}

fn fuzz_batch(c: &mut Criterion) {
    let cfg = FuzzConfig { samples: 10_000, seed: 1, ..FuzzConfig::default() };
    let mut group = c.benchmark_group("fuzz");
    group.sample_size(10);
    group.bench_function("10k samples", |b| b.iter(|| run_fuzz(black_box(&cfg)).unwrap()));
    group.finish();
}

fn verify_catenoid(c: &mut Criterion) {
    let cat = Catenoid::new(0.5).unwrap();
    let y = cat.through_point();
    let cfg = VerifyConfig { density: 16, ..VerifyConfig::default() };
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("catenoid density 16", |b| b.iter(|| verify(&cat, black_box(&y), &cfg).unwrap()));
    group.finish();
}

fn solver(c: &mut Criterion) {
    let frame = TangentFrame::coordinate(3, &[0, 1]).unwrap();
    let disk = disk_mesh(&DiskMeshSpec { center: point(&[0.0, 0.0, 0.6]), frame, rings: 16 }).unwrap();
    let start = jitter_along(&disk, &point(&[0.0, 0.0, 1.0]), 0.05, 1);
    let one_step = SolverConfig { max_iterations: 1, ..SolverConfig::default() };
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("one step, 16 rings", |b| b.iter(|| minimize(black_box(&start), &one_step).unwrap()));
    group.bench_function("full solve, 16 rings", |b| {
        b.iter(|| minimize(black_box(&start), &SolverConfig::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, field_eval, fuzz_batch, verify_catenoid, solver);
criterion_main!(benches);
