use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

use rotor_wigner::phase_space::grid::{GridSpec, MomentumWindow};
use rotor_wigner::phase_space::wigner::{wigner_from_angle_basis_with, wigner_from_m_basis_with};
use rotor_wigner::phase_space::Execution;
use rotor_wigner::quadrature::DEFAULT_ORDER;
use rotor_wigner::states::{coherent_state, CoherentSpec};
use rotor_wigner::{Axis, JKMBasisSpec, Jkm, MBasisSpec, RotorState};

fn momentum_path(c: &mut Criterion) {
    let spec = CoherentSpec::new(7.0, PI, 10, Axis::Alpha).unwrap();
    let mut basis = spec.minimal_basis();
    basis.m_max[1] = 2;
    let state = coherent_state(&spec, &basis).unwrap();
    let mut group = c.benchmark_group("momentum_path");
    group.sample_size(20);
    for n in [64usize, 128] {
        let grid = GridSpec::new([n, 5, 1], MomentumWindow::of_basis(&MBasisSpec::new(24, 2, 0))).unwrap();
        for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
            group.bench_with_input(BenchmarkId::new(name, n), &grid, |b, g| {
                b.iter(|| wigner_from_m_basis_with(black_box(&state), g, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn angle_path(c: &mut Criterion) {
    let state = RotorState::jkm_eigenstate(JKMBasisSpec::fixed(12, 1, 1).unwrap(), Jkm::new(6, 1, 1).unwrap()).unwrap();
    let grid = GridSpec::new([1, 64, 1], MomentumWindow::new([1, -12, 1], [1, 12, 1]).unwrap()).unwrap();
    let mut group = c.benchmark_group("angle_path");
    group.sample_size(10);
    for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
        group.bench_function(name, |b| {
            b.iter(|| wigner_from_angle_basis_with(black_box(&state), &grid, DEFAULT_ORDER, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, momentum_path, angle_path);
criterion_main!(benches);
