use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use locapart_core::basis::build_basis;
use locapart_core::geometry::{build_molecule, GeometrySpec, Vec3};
use locapart_core::grid::{build_grid, GridLevel};
use locapart_core::halfspace::plane_eri;
use locapart_core::integrals::eri_tensor;
use locapart_core::manybody::Scheme;
use locapart_core::partition::{build_partition, plane_partition};
use locapart_core::pipeline::{run_dynamics, InitialSpec, System, SystemOptions, TimeSpec};

fn integrals(c: &mut Criterion) {
    let m = build_molecule(&GeometrySpec::h2_dimer_collinear(1.4, 5.0)).unwrap();
    let basis = build_basis(&m, "6-31g").unwrap();
    c.bench_function("eri_tensor/dimer_6-31g", |b| b.iter(|| eri_tensor(black_box(&basis))));

    let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
    let basis = build_basis(&m, "sp").unwrap();
    let full = eri_tensor(&basis);
    let mut g = c.benchmark_group("plane");
    g.sample_size(10);
    g.bench_function("plane_eri/h2_sp", |b| b.iter(|| plane_eri(black_box(&basis), 0.0, &full)));
    g.finish();
}

fn grids(c: &mut Criterion) {
    let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
    let voronoi = build_partition(&m).unwrap();
    let plane = plane_partition(&m, Vec3::z(), 0.0).unwrap();
    let mut g = c.benchmark_group("grid");
    g.sample_size(10);
    g.bench_function("build/voronoi_default", |b| b.iter(|| build_grid(&m, &voronoi, GridLevel::Default)));
    g.bench_function("build/plane_default", |b| b.iter(|| build_grid(&m, &plane, GridLevel::Default)));
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let opts = SystemOptions::new("sp", Scheme::FullCi2e).with_grid(GridLevel::Coarse);
    let system = System::build(&GeometrySpec::h2(1.4), &opts).unwrap();
    let product = InitialSpec::Product { spin: locapart_core::manybody::SpinCoupling::Singlet };
    let mut g = c.benchmark_group("dynamics");
    g.sample_size(10);
    g.bench_function("series/h2_sp_4096", |b| b.iter(|| run_dynamics(&system, &product, &TimeSpec::default()).unwrap()));
    g.bench_function("system/h2_sp_coarse", |b| b.iter(|| System::build(&GeometrySpec::h2(1.4), &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, integrals, grids, dynamics);
criterion_main!(benches);
