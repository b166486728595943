//! Initial data builders.

use nalgebra::Vector3;

use crate::error::Result;
use crate::field::{DiscreteField, GridSpec};
use crate::group::{AlgebraVector, GroupElement, GroupKind};
use crate::retraction::Retraction;

/// Curve `g^{j+1} = g^j tau(dt xi)` with constant `xi`, `N + 1` nodes.
pub fn constant_rate_curve(
    ret: &Retraction,
    start: &GroupElement,
    xi: &AlgebraVector,
    dt: f64,
    n_time: usize,
) -> Result<Vec<GroupElement>> {
    let step = ret.tau(&(xi * dt))?;
    let mut out = Vec::with_capacity(n_time + 1);
    out.push(start.clone());
    for j in 0..n_time {
        let next = out[j].compose(&step)?;
        out.push(next);
    }
    Ok(out)
}

/// Initial data of the space-evolution problem from two neighbouring
/// curves: returns `(g0, eta0)` with `eta0[j] = tau^{-1}(g0[j]^{-1} g1[j]) / ds`
/// for `j < N`.
pub fn reconstruct_initial_data(
    ret: &Retraction,
    g0: &[GroupElement],
    g1: &[GroupElement],
    ds: f64,
) -> Result<(Vec<GroupElement>, Vec<AlgebraVector>)> {
    let n = g0.len().min(g1.len()).saturating_sub(1);
    let eta = (0..n)
        .map(|j| Ok(ret.tau_inv(&g0[j].between(&g1[j])?)? * (1.0 / ds)))
        .collect::<Result<Vec<_>>>()?;
    Ok((g0.to_vec(), eta))
}

/// Two curves moving with constant body velocities: the first starts at the
/// identity with `xi0`, the second at translation `(0, 0, ds)` with `xi1`.
pub fn moving_end_data(
    ret: &Retraction,
    grid: &GridSpec,
    xi0: &AlgebraVector,
    xi1: &AlgebraVector,
) -> Result<(Vec<GroupElement>, Vec<AlgebraVector>)> {
    let start0 = GroupElement::identity(GroupKind::Se3);
    let start1 = GroupElement::translation(Vector3::new(0.0, 0.0, grid.ds));
    let g0 = constant_rate_curve(ret, &start0, xi0, grid.dt, grid.n_time)?;
    let g1 = constant_rate_curve(ret, &start1, xi1, grid.dt, grid.n_time)?;
    reconstruct_initial_data(ret, &g0, &g1, grid.ds)
}

/// Straight beam at rest along the third axis: `g = (I, (0, 0, a ds))`.
pub fn rest_beam(grid: GridSpec) -> Result<DiscreteField> {
    DiscreteField::from_fn(grid, GroupKind::Se3, |_, a| {
        GroupElement::translation(Vector3::new(0.0, 0.0, a as f64 * grid.ds))
    })
}

/// Samples a scalar function `y(t, s)` on the grid.
pub fn sample_scalar(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<DiscreteField> {
    DiscreteField::from_fn(grid, GroupKind::Rn(1), |j, a| {
        GroupElement::rn(&[f(j as f64 * grid.dt, a as f64 * grid.ds)])
    })
}
