mod common;

use std::f64::consts::PI;

use msvi_core::scenario::{rest_beam, sample_scalar};
use msvi_core::{
    AlgebraVector, BeamModel, BoundaryRegime, DiscreteField, Discretization, GridSpec, GroupKind, Retraction,
    ScalarWaveModel, SolverSettings, Stepper,
};

fn steel() -> msvi_core::BeamParameters {
    msvi_core::BeamParameters {
        side: 0.01,
        density: 7850.0,
        youngs_modulus: 2.0e11,
        poisson_ratio: 0.3,
    }
}

#[test]
fn rest_beam_is_a_fixed_point_of_time_marching() {
    // Time marching is explicit in structure: c dt / ds <= 1 with the axial
    // wave speed of steel (about 5 km/s).
    let grid = GridSpec::new(110, 6, 2e-6, 0.02).unwrap();
    let model = BeamModel::new(steel(), grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Se3);
    let disc = Discretization::new(&model, &ret).unwrap();
    let rest = rest_beam(grid).unwrap();
    for regime in [BoundaryRegime::TimeOnly, BoundaryRegime::SpaceTime] {
        let mut field = rest.clone();
        let stepper = Stepper::new(disc, regime, SolverSettings::default()).unwrap();
        stepper.march_time(&mut field).unwrap();
        let drift = field.distance(&rest).unwrap();
        assert!(drift <= 1e-10, "{regime:?}: drift {drift:e}");
    }
}

#[test]
fn rest_beam_is_a_fixed_point_of_space_marching() {
    let grid = GridSpec::new(4, 105, 0.04, 0.02).unwrap();
    let model = BeamModel::new(steel(), grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Se3);
    let disc = Discretization::new(&model, &ret).unwrap();
    let rest = rest_beam(grid).unwrap();
    for regime in [BoundaryRegime::SpaceEvolutionBvp, BoundaryRegime::SpaceTime] {
        let mut field = rest.clone();
        let stepper = Stepper::new(disc, regime, SolverSettings::default()).unwrap();
        stepper.march_space(&mut field).unwrap();
        let drift = field.distance(&rest).unwrap();
        assert!(drift <= 1e-10, "{regime:?}: drift {drift:e}");
    }
}

#[test]
fn next_strip_of_rest_beam_is_axial_translate() {
    let grid = GridSpec::new(6, 4, 0.04, 0.02).unwrap();
    let model = BeamModel::new(steel(), grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Se3);
    let disc = Discretization::new(&model, &ret).unwrap();
    let rest = rest_beam(grid).unwrap();
    let mut field = rest.clone();
    // Scramble the unknown strip so the solve has work to do.
    for j in 0..=grid.n_time {
        field.set(j, 2, field.at(j, 1).clone()).unwrap();
    }
    let stepper = Stepper::new(disc, BoundaryRegime::SpaceEvolutionBvp, SolverSettings::default()).unwrap();
    stepper.step_space(&mut field, 1).unwrap();
    for j in 0..grid.n_time {
        let d = field.at(j, 2).distance(rest.at(j, 2)).unwrap();
        assert!(d <= 1e-12, "node ({j}, 2) off by {d:e}");
    }
}

#[test]
fn time_step_commutes_with_left_translation() {
    let grid = GridSpec::new(4, 6, 1e-3, 0.05).unwrap();
    let model = BeamModel::new(common::soft_beam(), grid.dt, grid.ds).unwrap();
    let mut rng = common::rng(21);
    for ret in [Retraction::cayley(GroupKind::Se3), Retraction::exponential(GroupKind::Se3)] {
        let disc = Discretization::new(&model, &ret).unwrap();
        let stepper = Stepper::new(disc, BoundaryRegime::TimeOnly, SolverSettings::default()).unwrap();
        let base = common::moving_beam(&ret, grid, |a| {
            AlgebraVector::from_slice(&[0.5 * a as f64, 0.2, 1.0, 0.1, 0.0, 0.05 * a as f64])
        });
        for _ in 0..5 {
            let h = common::random_element(&mut rng, GroupKind::Se3);
            let mut direct = base.clone();
            stepper.step_time(&mut direct, 1).unwrap();
            let mut moved = base.left_translate(&h).unwrap();
            stepper.step_time(&mut moved, 1).unwrap();
            let expect = direct.left_translate(&h).unwrap();
            let d = moved.distance(&expect).unwrap();
            assert!(d <= 1e-9, "{:?}: left-invariance defect {d:e}", ret.kind());
        }
    }
}

fn wave_exact(c: f64) -> impl Fn(f64, f64) -> f64 {
    move |t, s| (2.0 * PI * (s - c * t)).sin()
}

/// Time-marches a scalar wave under prescribed boundary data from the exact
/// travelling wave; returns the field and the max nodal error.
fn wave_time_run(c: f64, n_time: usize, n_space: usize, cfl: f64) -> (DiscreteField, f64) {
    let ds = 1.0 / n_space as f64;
    let dt = cfl * ds / c;
    let grid = GridSpec::new(n_time, n_space, dt, ds).unwrap();
    let model = ScalarWaveModel::new(c, dt, ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Rn(1));
    let disc = Discretization::new(&model, &ret).unwrap();
    let exact = sample_scalar(grid, wave_exact(c)).unwrap();
    let mut field = exact.clone();
    let stepper = Stepper::new(disc, BoundaryRegime::SpaceTime, SolverSettings::default()).unwrap();
    stepper.march_time(&mut field).unwrap();
    let err = field.distance(&exact).unwrap();
    (field, err)
}

#[test]
fn wave_space_marching_reproduces_time_marching() {
    let c = 1.0;
    let (timed, _) = wave_time_run(c, 12, 12, 1.0);
    let grid = *timed.grid();
    let model = ScalarWaveModel::new(c, grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Rn(1));
    let disc = Discretization::new(&model, &ret).unwrap();
    let mut spaced = timed.clone();
    for j in 1..grid.n_time {
        for a in 2..=grid.n_space {
            spaced.set(j, a, msvi_core::GroupElement::rn(&[0.0])).unwrap();
        }
    }
    let stepper = Stepper::new(disc, BoundaryRegime::SpaceTime, SolverSettings::default()).unwrap();
    stepper.march_space(&mut spaced).unwrap();
    let d = spaced.distance(&timed).unwrap();
    assert!(d <= 1e-9, "space and time marching differ by {d:e}");
}

/// Max nodal errors of the travelling wave at CFL 0.5 under simultaneous
/// halving of both steps, up to the same final time.
pub fn wave_refinement_errors() -> Vec<f64> {
    [10usize, 20, 40]
        .iter()
        .map(|&m| wave_time_run(1.0, m, m, 0.5).1)
        .collect()
}

#[test]
fn wave_error_decreases_monotonically_under_refinement() {
    let errs = wave_refinement_errors();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "errors {errs:?}");
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    // Regression pin of the observed order on the finest pair.
    assert!((orders[1] - 2.0).abs() < 0.1, "observed orders {orders:?}");
}
