use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cuspforge::assembly::{classify_series, growth_truncation_planner};
use cuspforge::curvature::{cusp_sectional_curvatures, total_gaussian_curvature};
use cuspforge::cusps::cusp_volume;
use cuspforge::geodesics::{connect_geodesic, gauss_bonnet_triangle, integrate_geodesic};
use cuspforge_bench as fx;

fn profiles(c: &mut Criterion) {
    let f = fx::decay_profile();
    let ts = fx::sample_points(1000);
    c.bench_function("profile_jet_1000", |b| {
        b.iter(|| ts.iter().map(|&t| f.jet(black_box(t)).unwrap().d2).sum::<f64>())
    });
    c.bench_function("sectional_curvature_1000", |b| {
        b.iter(|| {
            ts.iter()
                .map(|&t| cusp_sectional_curvatures(&f, black_box(t)).unwrap().tangential)
                .sum::<f64>()
        })
    });
}

fn volumes(c: &mut Criterion) {
    let cusp = fx::decay_cusp();
    c.bench_function("cusp_volume_decay", |b| b.iter(|| cusp_volume(black_box(&cusp)).unwrap()));

    let mut group = c.benchmark_group("classify_series");
    for p in [0.5, 2.0, 3.5] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| classify_series(|k| (k as f64).powf(-p), |k| k.powf(-p)).unwrap())
        });
    }
    group.finish();
}

fn geodesics(c: &mut Criterion) {
    let surface = fx::cusp_surface();
    let start = fx::escaping_ray();
    let mut group = c.benchmark_group("integrate_geodesic");
    for tol in [1e-6, 1e-10] {
        group.bench_with_input(BenchmarkId::from_parameter(tol), &tol, |b, &tol| {
            b.iter(|| integrate_geodesic(&surface, start, 100.0, tol).unwrap())
        });
    }
    group.finish();
    c.bench_function("connect_geodesic_cusp", |b| {
        b.iter(|| connect_geodesic(&surface, (0.0, 0.0), black_box((2.0, 1.0)), 1e-10).unwrap())
    });
}

fn surfaces(c: &mut Criterion) {
    let m = fx::softplus_surface();
    let mut group = c.benchmark_group("surfaces");
    group.sample_size(10);
    group.bench_function("total_gaussian_curvature_r5", |b| b.iter(|| total_gaussian_curvature(&m, 5.0).unwrap()));
    group.bench_function("gauss_bonnet_triangle_250k", |b| {
        b.iter(|| gauss_bonnet_triangle(&m, [(-1.0, -1.0), (1.5, -0.5), (0.0, 1.5)], 250_000, 1e-10).unwrap())
    });
    group.finish();
}

fn planner(c: &mut Criterion) {
    let p = fx::planner_params();
    let mut group = c.benchmark_group("planner");
    group.sample_size(10);
    group.bench_function("growth_truncation_planner_exp2", |b| {
        b.iter(|| growth_truncation_planner(&|r: f64| (2.0 * r).exp(), &p).unwrap())
    });
    group.finish();
}

criterion_group!(benches, profiles, volumes, geodesics, surfaces, planner);
criterion_main!(benches);
