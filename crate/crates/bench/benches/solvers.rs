use std::f64::consts::PI;
use std::hint::black_box;

use canalband::boundary_layer::solve_w;
use canalband::dispersion::{closed_form_spectrum, enumerate_knots};
use canalband::domain::{DomainSpec, HoleShape, HoleSpec};
use canalband::limit_fem::{assemble, build_mesh, solve_lowest, EigenMethod, SolverOptions};
use canalband::polarization::polarization_numeric;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn disk_domain() -> DomainSpec {
    DomainSpec::rectangle(0.2).with_hole(HoleSpec::centered(HoleShape::Disk { radius: 1.0 }, 0.1))
}

fn dispersion(c: &mut Criterion) {
    c.bench_function("closed_form_spectrum_m6", |b| b.iter(|| closed_form_spectrum(0.2, black_box(0.7), 6)));
    c.bench_function("enumerate_knots_mu120", |b| b.iter(|| enumerate_knots(0.2, black_box(120.0))));
}

fn meshing(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_mesh");
    for inv_h in [16u32, 32] {
        let d = disk_domain();
        g.bench_with_input(BenchmarkId::new("disk_hole", inv_h), &inv_h, |b, &n| {
            b.iter(|| build_mesh(&d, 1.0 / n as f64).unwrap())
        });
    }
    g.finish();
}

fn eigensolvers(c: &mut Criterion) {
    let mesh = build_mesh(&disk_domain(), 1.0 / 32.0).unwrap();
    let ops = assemble(&mesh, 0.5 * PI);
    c.bench_function("assemble_h32", |b| b.iter(|| assemble(&mesh, black_box(0.5 * PI))));
    let mut g = c.benchmark_group("solve_lowest_m6_h32");
    g.sample_size(10);
    for method in [EigenMethod::Dense, EigenMethod::ShiftInvert] {
        let opts = SolverOptions { method, ..SolverOptions::default() };
        g.bench_function(format!("{method:?}"), |b| b.iter(|| solve_lowest(&ops, 6, &opts).unwrap()));
    }
    g.finish();
}

fn exterior_problems(c: &mut Criterion) {
    let mut g = c.benchmark_group("exterior");
    g.sample_size(10);
    g.bench_function("polarization_disk_res64", |b| {
        b.iter(|| polarization_numeric(&HoleShape::Disk { radius: 1.0 }, 20.0, 64).unwrap())
    });
    g.bench_function("boundary_layer_t8_res16", |b| b.iter(|| solve_w(8.0, 16).unwrap()));
    g.finish();
}

criterion_group!(benches, dispersion, meshing, eigensolvers, exterior_problems);
criterion_main!(benches);
