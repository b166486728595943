use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use msvi_core::conservation::{MomentumKind, NoetherLedger};
use msvi_core::scenario::{moving_end_data, sample_scalar};
use msvi_core::stepper::space_evolution_field;
use msvi_core::{
    AlgebraVector, BeamModel, BeamParameters, BoundaryRegime, Discretization, GridSpec, GroupKind, Retraction,
    ScalarWaveModel, SolverSettings, Stepper,
};

fn steel() -> BeamParameters {
    BeamParameters {
        side: 0.01,
        density: 7850.0,
        youngs_modulus: 2.0e11,
        poisson_ratio: 0.3,
    }
}

fn xi() -> AlgebraVector {
    AlgebraVector::from_slice(&[0.3, -0.2, 0.5, 0.01, -0.02, 0.03])
}

fn retractions(c: &mut Criterion) {
    for ret in [Retraction::cayley(GroupKind::Se3), Retraction::exponential(GroupKind::Se3)] {
        let name = format!("{:?}", ret.kind()).to_lowercase();
        let x = xi();
        let g = ret.tau(&x).unwrap();
        c.bench_function(&format!("{name}/tau"), |b| b.iter(|| ret.tau(black_box(&x)).unwrap()));
        c.bench_function(&format!("{name}/tau_inv"), |b| b.iter(|| ret.tau_inv(black_box(&g)).unwrap()));
        c.bench_function(&format!("{name}/dtau_r_inv"), |b| {
            b.iter(|| ret.dtau_r_inv(black_box(&x)).unwrap())
        });
    }
}

fn beam(c: &mut Criterion) {
    let grid = GridSpec::new(12, 4, 0.04, 0.02).unwrap();
    let model = BeamModel::new(steel(), grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Se3);
    let disc = Discretization::new(&model, &ret).unwrap();
    let (g0, eta0) = moving_end_data(&ret, &grid, &(xi() * 1e-4), &(xi() * 2e-4)).unwrap();
    let start = space_evolution_field(&disc, grid, &g0, &eta0).unwrap();
    let stepper = Stepper::new(disc, BoundaryRegime::SpaceEvolutionBvp, SolverSettings::default()).unwrap();

    c.bench_function("beam/nodal_residual", |b| {
        b.iter(|| disc.nodal_residual(black_box(&start), 3, 1).unwrap())
    });
    let mut solved = start.clone();
    stepper.march_space(&mut solved).unwrap();
    c.bench_function("beam/noether_ledger", |b| {
        b.iter(|| NoetherLedger::build(&disc, black_box(&solved), MomentumKind::Conservative).unwrap())
    });
    let mut group = c.benchmark_group("beam");
    group.sample_size(10);
    group.bench_function("march_space_12x4", |b| {
        b.iter(|| {
            let mut f = start.clone();
            stepper.march_space(&mut f).unwrap()
        })
    });
    group.finish();
}

fn wave(c: &mut Criterion) {
    let grid = GridSpec::new(40, 40, 0.02, 0.04).unwrap();
    let model = ScalarWaveModel::new(1.0, grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Rn(1));
    let disc = Discretization::new(&model, &ret).unwrap();
    let start = sample_scalar(grid, |t, s| 0.1 * (std::f64::consts::PI * (s - t)).sin()).unwrap();
    let stepper = Stepper::new(disc, BoundaryRegime::TimeOnly, SolverSettings::default()).unwrap();
    let mut group = c.benchmark_group("wave");
    group.sample_size(10);
    group.bench_function("march_time_40x40", |b| {
        b.iter(|| {
            let mut f = start.clone();
            stepper.march_time(&mut f).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, retractions, beam, wave);
criterion_main!(benches);
