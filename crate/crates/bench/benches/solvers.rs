use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polar4::scaling::build_report;
use polar4::solver::{alpha_dalgarno_lewis, alpha_finite_field, discretize_hamiltonian, eigensolve, spectral_summary};
use polar4::{ModelSpec, NumericPolicy};
use polar4_bench::cases;

fn dalgarno_lewis(c: &mut Criterion) {
    let mut g = c.benchmark_group("dalgarno_lewis");
    for (name, spec, grid) in cases(4001) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &grid, |b, grid| {
            b.iter(|| alpha_dalgarno_lewis(&spec, grid).unwrap())
        });
    }
    g.finish();
}

fn finite_field(c: &mut Criterion) {
    let mut g = c.benchmark_group("finite_field");
    g.sample_size(20);
    for (name, spec, grid) in cases(4001) {
        g.bench_with_input(BenchmarkId::from_parameter(name), &grid, |b, grid| {
            b.iter(|| alpha_finite_field(&spec, grid, 1e-3, true).unwrap())
        });
    }
    g.finish();
}

fn full_spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("full_spectrum");
    g.sample_size(10);
    for points in [501, 1001, 2001] {
        let (_, spec, grid) = cases(points).swap_remove(0);
        let ham = discretize_hamiltonian(&spec, &grid).unwrap();
        let k = grid.points() - 2;
        g.bench_with_input(BenchmarkId::from_parameter(points), &ham, |b, ham| {
            b.iter(|| eigensolve(ham, k).unwrap())
        });
    }
    g.finish();
}

fn reports(c: &mut Criterion) {
    let mut g = c.benchmark_group("report");
    g.sample_size(10);
    let policy = NumericPolicy::default();
    for spec in [ModelSpec::hydrogen(1.0), ModelSpec::square_well_scaled(1.0, 1.0)] {
        g.bench_function(format!("{}/build_report", spec.family()), |b| {
            b.iter(|| build_report(&spec, &policy).unwrap())
        });
        g.bench_function(format!("{}/spectral_summary", spec.family()), |b| {
            b.iter(|| spectral_summary(&spec, &policy).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dalgarno_lewis, finite_field, full_spectrum, reports);
criterion_main!(benches);
