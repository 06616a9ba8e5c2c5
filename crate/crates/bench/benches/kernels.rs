use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ruusc::algebra::tabulate_inf_convolution;
use ruusc::relaxation::{energy_j, sample_constrained_fields, ConstraintSet, Integrand, Mesh};
use ruusc::{lsc_envelope, make_samples, modulus_profile, EnvelopeParams, FunctionExpr, Provenance, Region, TSchedule};

fn modulus(c: &mut Criterion) {
    let region = Region::ball(vec![0.0, 0.0], 2.0, false).unwrap();
    let f = FunctionExpr::NonconvexTest.build(2).unwrap();
    let ts = TSchedule::geometric(20);
    let mut group = c.benchmark_group("modulus_profile");
    for n in [100, 1000] {
        let samples = region.sample_interiorish(n, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &samples, |b, s| {
            b.iter(|| modulus_profile(&f, &region, 1.0, &ts, black_box(s), false).unwrap())
        });
    }
    group.finish();
}

fn envelope(c: &mut Criterion) {
    let f = FunctionExpr::Step { normal: vec![1.0, 0.0], offset: 0.0, below: 0.0, above: 1.0 }.build(2).unwrap();
    let params = EnvelopeParams::default();
    c.bench_function("lsc_envelope", |b| b.iter(|| lsc_envelope(&f, black_box(&[0.0, 0.3]), &params).unwrap()));
}

fn inf_convolution(c: &mut Criterion) {
    let f = FunctionExpr::norm_power(1.0).build(1).unwrap();
    let g = FunctionExpr::indicator(Region::closed_box(vec![-1.0], vec![1.0]).unwrap()).build(1).unwrap();
    let mut group = c.benchmark_group("inf_convolution_1d");
    for n in [101, 601] {
        let grid = make_samples(&Provenance::UniformGrid { lower: vec![-3.0], upper: vec![3.0], resolution: n }).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &grid, |b, grid| {
            b.iter(|| tabulate_inf_convolution(&f, &g, black_box(grid)).unwrap())
        });
    }
    group.finish();
}

fn energy(c: &mut Criterion) {
    let l = Integrand::frobenius_squared();
    let s = ConstraintSet::s_epsilon(1.0).unwrap();
    let mut group = c.benchmark_group("energy_j");
    for n in [16, 32] {
        let mesh = Mesh::new(2, n).unwrap();
        let u = sample_constrained_fields(&s, mesh, 2, 0.5, 3).unwrap().pop().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| b.iter(|| energy_j(black_box(u), &l)));
    }
    group.finish();
}

criterion_group!(benches, modulus, envelope, inf_convolution, energy);
criterion_main!(benches);
