mod common;

use msvi_core::forms::{cartan_one_forms, multisymplectic_formula_check, symplecticity_probe, Evolution};
use msvi_core::model::WavePotential;
use msvi_core::scenario::{moving_end_data, sample_scalar};
use msvi_core::stepper::space_evolution_field;
use msvi_core::{
    AlgebraVector, BeamModel, BoundaryRegime, DensityModel, DiscreteField, Discretization, GridSpec, GroupKind, Jet, Retraction,
    ScalarWaveModel, SolverSettings, Stepper, TangentField,
};
use rand::Rng;

fn random_tangents(rng: &mut impl Rng, field: &DiscreteField, pick: impl Fn(usize, usize) -> bool) -> TangentField {
    let mut t = TangentField::zeros(field);
    let g = field.grid();
    let n = field.kind().algebra_dim();
    for j in 0..=g.n_time {
        for a in 0..=g.n_space {
            if pick(j, a) {
                t.set(j, a, common::random_vector(rng, n, 1.0));
            }
        }
    }
    t
}

fn sine_gordon_run(regime: BoundaryRegime) -> (ScalarWaveModel, DiscreteField) {
    let grid = GridSpec::new(50, 16, 0.03, 0.0625).unwrap();
    let model = ScalarWaveModel::new(1.0, grid.dt, grid.ds)
        .unwrap()
        .with_potential(WavePotential::SineGordon { strength: 2.0 })
        .unwrap();
    let ret = Retraction::cayley(GroupKind::Rn(1));
    let disc = Discretization::new(&model, &ret).unwrap();
    let mut field = sample_scalar(grid, |t, s| 1.5 * (std::f64::consts::PI * s).sin() * (1.0 + t)).unwrap();
    Stepper::new(disc, regime, SolverSettings::default())
        .unwrap()
        .march_time(&mut field)
        .unwrap();
    (model, field)
}

/// Largest relative deviation of the time two-form over 50 steps of a
/// sine-Gordon field with free ends.
pub fn wave_time_symplecticity() -> f64 {
    let (model, field) = sine_gordon_run(BoundaryRegime::TimeOnly);
    let ret = Retraction::cayley(GroupKind::Rn(1));
    let disc = Discretization::new(&model, &ret).unwrap();
    let stepper = Stepper::new(disc, BoundaryRegime::TimeOnly, SolverSettings::default()).unwrap();
    let mut rng = common::rng(41);
    let mut v = random_tangents(&mut rng, &field, |j, _| j <= 1);
    let mut w = random_tangents(&mut rng, &field, |j, _| j <= 1);
    let report = symplecticity_probe(&stepper, &field, Evolution::Time, &mut v, &mut w, 1e-4).unwrap();
    assert_eq!(report.values.len(), 50);
    report.max_relative_deviation()
}

#[test]
fn wave_time_flow_is_symplectic() {
    let d = wave_time_symplecticity();
    assert!(d <= 1e-6, "two-form deviation {d:e}");
}

/// Beam space evolution from two nearby moving curves (small amplitude).
pub fn small_amplitude_bvp(n_time: usize) -> (BeamModel, DiscreteField) {
    let grid = GridSpec::new(n_time, 40, 0.04, 0.02).unwrap();
    let params = msvi_core::BeamParameters {
        side: 0.01,
        density: 7850.0,
        youngs_modulus: 2.0e11,
        poisson_ratio: 0.3,
    };
    let model = BeamModel::new(params, grid.dt, grid.ds).unwrap();
    let ret = Retraction::cayley(GroupKind::Se3);
    let disc = Discretization::new(&model, &ret).unwrap();
    let f = 1e-4;
    let xi0 = AlgebraVector::from_slice(&[0.0, -0.85, 0.0, 0.0, -0.1, 0.0]) * f;
    let xi1 = AlgebraVector::from_slice(&[0.06, -0.849, -0.04, -0.03, -0.1, 0.0]) * f;
    let (g0, eta0) = moving_end_data(&ret, &grid, &xi0, &xi1).unwrap();
    let mut field = space_evolution_field(&disc, grid, &g0, &eta0).unwrap();
    Stepper::new(disc, BoundaryRegime::SpaceEvolutionBvp, SolverSettings::default())
        .unwrap()
        .march_space(&mut field)
        .unwrap();
    (model, field)
}

/// Smooth random variation of the first slice, carried rigidly to the second
/// so that the initial strain is unchanged.
fn transported_tangents(rng: &mut impl Rng, field: &DiscreteField) -> TangentField {
    let n = field.grid().n_time;
    let modes: Vec<AlgebraVector> = (0..3).map(|_| common::random_vector(rng, 6, 1.0)).collect();
    let mut t = TangentField::zeros(field);
    for j in 0..=n {
        let x = j as f64 / n as f64;
        let v0 = &(&modes[0] + &(&modes[1] * x)) + &(&modes[2] * (std::f64::consts::PI * x).sin());
        let h = field.at(j, 0).between(field.at(j, 1)).unwrap();
        let v1 = AlgebraVector(h.inverse().adjoint() * &v0.0);
        t.set(j, 0, v0);
        t.set(j, 1, v1);
    }
    t
}

/// Largest relative deviation of the space two-form over all strips of a
/// beam space evolution.
pub fn beam_space_symplecticity() -> f64 {
    let (model, field) = small_amplitude_bvp(50);
    let ret = Retraction::cayley(GroupKind::Se3);
    let disc = Discretization::new(&model, &ret).unwrap();
    let stepper = Stepper::new(disc, BoundaryRegime::SpaceEvolutionBvp, SolverSettings::default()).unwrap();
    let mut rng = common::rng(42);
    let mut v = transported_tangents(&mut rng, &field);
    let mut w = transported_tangents(&mut rng, &field);
    let report = symplecticity_probe(&stepper, &field, Evolution::Space, &mut v, &mut w, 1e-3).unwrap();
    assert_eq!(report.values.len(), 40);
    report.max_relative_deviation()
}

#[test]
fn beam_space_flow_is_symplectic() {
    let d = beam_space_symplecticity();
    assert!(d <= 1e-6, "two-form deviation {d:e}");
}

/// Multisymplectic defect (relative to the summed contributions) for first
/// variations and for arbitrary tangents on a solved sine-Gordon field.
pub fn multisymplectic_defects() -> (f64, f64) {
    let (model, field) = sine_gordon_run(BoundaryRegime::SpaceTime);
    let ret = Retraction::cayley(GroupKind::Rn(1));
    let disc = Discretization::new(&model, &ret).unwrap();
    let stepper = Stepper::new(disc, BoundaryRegime::SpaceTime, SolverSettings::default()).unwrap();
    let g = *field.grid();
    let mut rng = common::rng(43);
    // First variations: free data on the prescribed nodes, the rest follows
    // from the linearized equations.
    let prescribed = |j: usize, a: usize| j <= 1 || a == 0 || a == g.n_space;
    let mut v = random_tangents(&mut rng, &field, prescribed);
    let mut w = random_tangents(&mut rng, &field, prescribed);
    stepper.propagate_tangent_time(&field, &mut v, 1e-6).unwrap();
    stepper.propagate_tangent_time(&field, &mut w, 1e-6).unwrap();
    let on_solution = multisymplectic_formula_check(&disc, &field, &v, &w, 1e-6).unwrap();
    let v = random_tangents(&mut rng, &field, |_, _| true);
    let w = random_tangents(&mut rng, &field, |_, _| true);
    let perturbed = multisymplectic_formula_check(&disc, &field, &v, &w, 1e-6).unwrap();
    (on_solution.relative(), perturbed.relative())
}

#[test]
fn multisymplectic_formula_separates_variations_from_noise() {
    let (good, bad) = multisymplectic_defects();
    assert!(good <= 1e-7, "defect on first variations {good:e}");
    assert!(bad >= 1e-3, "defect on arbitrary tangents {bad:e}");
}

#[test]
fn cartan_forms_sum_to_the_variation_of_the_lagrangian() {
    let model = BeamModel::new(common::soft_beam(), 1e-3, 0.05).unwrap();
    let mut rng = common::rng(44);
    for ret in [Retraction::cayley(GroupKind::Se3), Retraction::exponential(GroupKind::Se3)] {
        let disc = Discretization::new(&model, &ret).unwrap();
        for _ in 0..50 {
            let g = common::random_element(&mut rng, GroupKind::Se3);
            let xi = common::random_in_ball(&mut rng, GroupKind::Se3, 50.0);
            let mut eta = common::random_vector(&mut rng, 6, 0.2);
            eta[5] += 1.0;
            let jet = Jet::from_algebra(&ret, 1e-3, 0.05, g, xi, eta).unwrap();
            let verts = jet.vertices().unwrap();
            let z: Vec<AlgebraVector> = (0..3).map(|_| common::random_vector(&mut rng, 6, 1.0)).collect();
            let lag = |h: f64| {
                let moved: Vec<_> = verts
                    .iter()
                    .zip(&z)
                    .map(|(v, zk)| v.compose(&ret.tau(&(zk * h)).unwrap()).unwrap())
                    .collect();
                let j = Jet::from_vertices(&ret, 1e-3, 0.05, &moved[0], &moved[1], &moved[2]).unwrap();
                model.evaluate(&j.g, &j.xi, &j.eta)
            };
            let h = 1e-5;
            let fd = (lag(h) - lag(-h)) / (2.0 * h);
            let theta = cartan_one_forms(&disc, &jet, [&z[0], &z[1], &z[2]]).unwrap();
            let sum: f64 = theta.iter().sum();
            let scale = theta.iter().map(|t| t.abs()).fold(0.0, f64::max).max(1e-300);
            assert!((sum - fd).abs() / scale <= 1e-6, "{:?}: {sum} vs {fd}", ret.kind());
        }
    }
}
