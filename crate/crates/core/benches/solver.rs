//! Parallel vs single-worker timings of the data-parallel kernels.
//!
//! `cargo bench` compares a one-thread pool against the default pool;
//! `cargo bench --no-default-features` builds the plain sequential fallback.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use magspec::disk_spectrum::disk_modes;
use magspec::fem::mesh::{assemble, PolarMesh};
use magspec::fem::{solve, SolverConfig};
use magspec::geometry::{factors, Harmonic, RadiusProfile};
use magspec::par;
use magspec::perturbation::{perturbation_report, PerturbationProfile};
use magspec::spectrum::BoundaryCondition;

fn flower() -> RadiusProfile {
    RadiusProfile::new(1.0, vec![Harmonic { n: 5, a: 0.2, b: 0.0 }]).expect("valid profile")
}

fn modes() -> [(&'static str, Option<usize>); 2] {
    [("sequential", Some(1)), ("parallel", None)]
}

fn bench_assembly(c: &mut Criterion) {
    let profile = flower();
    let area = factors(&profile).area;
    let mut group = c.benchmark_group("assemble");
    for (nr, na) in [(48, 96), (96, 192)] {
        let mesh = PolarMesh::new(nr, na, BoundaryCondition::Dirichlet);
        for (label, threads) in modes() {
            group.bench_with_input(BenchmarkId::new(label, format!("{nr}x{na}")), &mesh, |b, mesh| {
                b.iter(|| par::with_threads(threads, || black_box(assemble(&profile, mesh, 5.0, area))))
            });
        }
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let profile = flower();
    let cfg = SolverConfig::new(BoundaryCondition::Dirichlet, 5.0, 5).with_mesh(48, 96);
    let mut group = c.benchmark_group("solve");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (label, threads) in modes() {
        group.bench_function(BenchmarkId::new(label, "48x96"), |b| {
            b.iter(|| par::with_threads(threads, || black_box(solve(&profile, &cfg).expect("solve"))))
        });
    }
    group.finish();
}

fn bench_disk_roots(c: &mut Criterion) {
    let mut group = c.benchmark_group("disk_modes");
    group.sample_size(10);
    for (label, threads) in modes() {
        group.bench_function(BenchmarkId::new(label, "beta20_n40"), |b| {
            b.iter(|| par::with_threads(threads, || black_box(disk_modes(20.0, 40).expect("roots"))))
        });
    }
    group.finish();
}

fn bench_q_table(c: &mut Criterion) {
    let profile = PerturbationProfile::cosine(2);
    let mut group = c.benchmark_group("q_table");
    group.sample_size(10);
    for (label, threads) in modes() {
        group.bench_function(BenchmarkId::new(label, "beta5_n60"), |b| {
            b.iter(|| par::with_threads(threads, || black_box(perturbation_report(5.0, &profile, 60).expect("report"))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_assembly, bench_solve, bench_disk_roots, bench_q_table);
criterion_main!(benches);
