use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use marchenko::direct::compute_scattering_data;
use marchenko::inverse::{invert_full, kernel_G, nested_solve, InverseOptions};
use marchenko::{BoundaryCondition, CMat, KGrid, PotentialSpec, ScatteringData, XGrid, C64};

fn well_data(n_k: usize) -> ScatteringData {
    let p = PotentialSpec::square_well(1, -8.0, 1.0).unwrap();
    compute_scattering_data(&p, &BoundaryCondition::robin(0.7), &KGrid::uniform(40.0, n_k).unwrap()).unwrap()
}

fn direct(c: &mut Criterion) {
    let p = PotentialSpec::diagonal_wells(vec![-6.0, -12.0], vec![1.0, 0.7]).unwrap();
    let u = CMat::from_row_slice(2, 2, &[C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
    let bc = marchenko::build_boundary(&u).unwrap();
    let kg = KGrid::uniform(40.0, 200).unwrap();
    c.bench_function("direct 2x2 wells, 200 k", |b| b.iter(|| compute_scattering_data(black_box(&p), &bc, &kg).unwrap()));
}

fn inverse(c: &mut Criterion) {
    let sd = well_data(800);
    c.bench_function("kernel G, 800 k", |b| b.iter(|| kernel_G(black_box(&sd)).unwrap()));
    let g = kernel_G(&sd).unwrap();
    c.bench_function("nested Marchenko solve, 600 nodes", |b| b.iter(|| nested_solve(black_box(&g), 0.025, 600).unwrap()));
    let xg = XGrid::new(15.0, 600).unwrap();
    let opts = InverseOptions::default();
    c.bench_function("full inversion, default grids", |b| b.iter(|| invert_full(black_box(&sd), &xg, &opts).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = direct, inverse
}
criterion_main!(benches);
