#![allow(dead_code)]

use msvi_core::{AlgebraVector, GroupElement, GroupKind, Retraction};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut impl Rng, dim: usize, scale: f64) -> AlgebraVector {
    AlgebraVector::from_vec((0..dim).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect())
}

/// Random algebra element whose angular part has norm at most `radius`.
pub fn random_in_ball(rng: &mut impl Rng, kind: GroupKind, radius: f64) -> AlgebraVector {
    let mut x = random_vector(rng, kind.algebra_dim(), 1.0);
    if kind != GroupKind::Rn(kind.algebra_dim()) {
        let w = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let target = radius * rng.random::<f64>();
        for i in 0..3 {
            x[i] *= target / w.max(1e-300);
        }
    }
    x
}

pub fn random_element(rng: &mut impl Rng, kind: GroupKind) -> GroupElement {
    let ret = Retraction::exponential(kind);
    ret.tau(&random_in_ball(rng, kind, 3.0)).unwrap()
}

/// Right-trivialized derivative of `tau` by central differences:
/// column i is vee( (tau(x + h e_i) - tau(x - h e_i)) / 2h * tau(x)^{-1} ).
pub fn fd_dtau_r(ret: &Retraction, x: &AlgebraVector, h: f64) -> DMatrix<f64> {
    let kind = ret.group();
    let n = kind.algebra_dim();
    let inv = ret.tau(x).unwrap().inverse().matrix();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let e = AlgebraVector::basis(n, i);
        let p = ret.tau(&(x + &(&e * h))).unwrap().matrix();
        let m = ret.tau(&(x - &(&e * h))).unwrap().matrix();
        let d = (p - m) / (2.0 * h) * &inv;
        let v = kind.vee(&d, 1e-5).unwrap();
        out.set_column(i, &v.0);
    }
    out
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

/// Rubber-like square section: slow enough waves for explicit-looking step
/// sizes in time-marching tests.
pub fn soft_beam() -> msvi_core::BeamParameters {
    msvi_core::BeamParameters {
        side: 0.05,
        density: 1000.0,
        youngs_modulus: 1.0e6,
        poisson_ratio: 0.45,
    }
}

/// Straight beam along the third axis whose second time slice moves with
/// body velocity `xi(a)`.
pub fn moving_beam(
    ret: &Retraction,
    grid: msvi_core::GridSpec,
    xi: impl Fn(usize) -> AlgebraVector,
) -> msvi_core::DiscreteField {
    let mut field = msvi_core::scenario::rest_beam(grid).unwrap();
    for a in 0..=grid.n_space {
        let g = field.at(0, a).compose(&ret.tau(&(&xi(a) * grid.dt)).unwrap()).unwrap();
        field.set(1, a, g).unwrap();
    }
    field
}
