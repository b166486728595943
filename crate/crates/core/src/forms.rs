//! Legendre transforms, Cartan one-forms and the (multi)symplectic
//! structure of the discrete flow.
//!
//! Two-forms are evaluated in the chart `u -> g tau(u)` around every node:
//! a one-form `theta` is pulled back to coordinates and `d theta (V, W)`
//! is taken by central differences, antisymmetrized.

use crate::dcel::{BoundaryRegime, Discretization};
use crate::error::{Error, Result};
use crate::field::{DiscreteField, Jet};
use crate::group::{AlgebraVector, CoAlgebraVector, GroupElement};
use crate::solver::TangentField;
use crate::stepper::Stepper;

/// The three Legendre covectors of a jet (conservative part).
pub fn legendre_transforms(disc: &Discretization, jet: &Jet) -> Result<[CoAlgebraVector; 3]> {
    Ok(disc.covectors(jet)?.legendre)
}

/// Values `theta^k(zeta)` of the three Cartan one-forms of a jet on a
/// variation given by left-trivialized vectors at the three vertices. Their
/// sum is the derivative of the discrete Lagrangian along the variation.
pub fn cartan_one_forms(disc: &Discretization, jet: &Jet, zeta: [&AlgebraVector; 3]) -> Result<[f64; 3]> {
    let f = legendre_transforms(disc, jet)?;
    Ok([f[0].pair(zeta[0]), f[1].pair(zeta[1]), f[2].pair(zeta[2])])
}

/// Left-trivialized image of the coordinate vector `w` at chart point `u`.
fn chart_vector(disc: &Discretization, u: &AlgebraVector, w: &AlgebraVector) -> Result<AlgebraVector> {
    Ok(AlgebraVector(disc.ret.dtau_l(u)? * &w.0))
}

fn chart_point(disc: &Discretization, g: &GroupElement, u: &AlgebraVector) -> Result<GroupElement> {
    g.compose(&disc.ret.tau(u)?)
}

/// `-d theta^k (V, W)` on triangle `(j, a)` for the vertex tangents taken
/// from `v` and `w`.
fn triangle_two_form(
    disc: &Discretization,
    field: &DiscreteField,
    v: &TangentField,
    w: &TangentField,
    j: usize,
    a: usize,
    k: usize,
    eps: f64,
) -> Result<f64> {
    let nodes = [(j, a), (j + 1, a), (j, a + 1)];
    let (dt, ds) = (disc.dt(), disc.ds());
    let theta = |dir: &TangentField, arg: &TangentField, s: f64| -> Result<f64> {
        let mut verts = Vec::with_capacity(3);
        for &(jj, aa) in &nodes {
            verts.push(chart_point(disc, field.at(jj, aa), &(dir.get(jj, aa) * s))?);
        }
        let jet = Jet::from_vertices(disc.ret, dt, ds, &verts[0], &verts[1], &verts[2])?;
        let f = legendre_transforms(disc, &jet)?;
        let (jj, aa) = nodes[k];
        let zeta = chart_vector(disc, &(dir.get(jj, aa) * s), arg.get(jj, aa))?;
        Ok(f[k].pair(&zeta))
    };
    let hv = fd_step(eps, nodes.iter().map(|&(jj, aa)| v.get(jj, aa)));
    let hw = fd_step(eps, nodes.iter().map(|&(jj, aa)| w.get(jj, aa)));
    let d = derivative(|s| theta(v, w, s), hv)? - derivative(|s| theta(w, v, s), hw)?;
    Ok(-d)
}

/// Result of the multisymplectic formula check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultisymplecticReport {
    /// `|sum of boundary two-form contributions|`.
    pub defect: f64,
    /// Sum of the absolute values of the contributions.
    pub scale: f64,
}

impl MultisymplecticReport {
    pub fn relative(&self) -> f64 {
        self.defect / self.scale.max(f64::MIN_POSITIVE)
    }
}

/// Sum over triangles touching the grid boundary of the two-forms
/// `Omega^k(V, W)` attached to the vertices lying on the boundary. Vanishes
/// when the field solves the DCEL at every interior node and `V`, `W` are
/// first variations.
pub fn multisymplectic_formula_check(
    disc: &Discretization,
    field: &DiscreteField,
    v: &TangentField,
    w: &TangentField,
    eps: f64,
) -> Result<MultisymplecticReport> {
    disc.check_field(field)?;
    let grid = *field.grid();
    let mut sum = 0.0;
    let mut scale = 0.0;
    for j in 0..grid.n_time {
        for a in 0..grid.n_space {
            let nodes = [(j, a), (j + 1, a), (j, a + 1)];
            for (k, &(jj, aa)) in nodes.iter().enumerate() {
                if grid.is_boundary_node(jj, aa) {
                    let om = triangle_two_form(disc, field, v, w, j, a, k, eps)?;
                    sum += om;
                    scale += om.abs();
                }
            }
        }
    }
    Ok(MultisymplecticReport { defect: sum.abs(), scale })
}

/// Direction of the evolution whose symplectic form is probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evolution {
    Time,
    Space,
}

/// Values of the discrete symplectic two-form along a solved field.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticityReport {
    /// `Omega(V, W)` on the slice pairs `(k, k+1)`.
    pub values: Vec<f64>,
}

impl SymplecticityReport {
    /// Largest `|omega_k - omega_0|`, relative to `|omega_0|`.
    pub fn max_relative_deviation(&self) -> f64 {
        let w0 = self.values[0];
        self.values
            .iter()
            .map(|w| (w - w0).abs())
            .fold(0.0, f64::max)
            / w0.abs().max(f64::MIN_POSITIVE)
    }
}

/// Two-form `d Theta^+` of the slice pair `(k, k+1)`. `Theta^+` pairs the
/// covectors `F2` (time) or `F3` (space) of the triangles of strip `k` with
/// the tangents at slice `k+1`.
pub fn slice_two_form(
    disc: &Discretization,
    field: &DiscreteField,
    evolution: Evolution,
    k: usize,
    v: &TangentField,
    w: &TangentField,
    eps: f64,
) -> Result<f64> {
    let grid = *field.grid();
    let (count, vertex) = match evolution {
        Evolution::Time => (grid.n_space, 1),
        Evolution::Space => (grid.n_time, 2),
    };
    let tri = |i: usize| match evolution {
        Evolution::Time => (k, i),
        Evolution::Space => (i, k),
    };
    let on_pair = |jj: usize, aa: usize| match evolution {
        Evolution::Time => jj == k || jj == k + 1,
        Evolution::Space => aa == k || aa == k + 1,
    };
    let (dt, ds) = (disc.dt(), disc.ds());
    let theta = |dir: &TangentField, arg: &TangentField, s: f64| -> Result<f64> {
        let mut total = 0.0;
        for i in 0..count {
            let (j, a) = tri(i);
            let nodes = [(j, a), (j + 1, a), (j, a + 1)];
            let mut verts = Vec::with_capacity(3);
            for &(jj, aa) in &nodes {
                let u = if on_pair(jj, aa) {
                    dir.get(jj, aa) * s
                } else {
                    AlgebraVector::zeros(dir.get(jj, aa).dim())
                };
                verts.push(chart_point(disc, field.at(jj, aa), &u)?);
            }
            let jet = Jet::from_vertices(disc.ret, dt, ds, &verts[0], &verts[1], &verts[2])?;
            let f = legendre_transforms(disc, &jet)?;
            let (jj, aa) = nodes[vertex];
            let zeta = chart_vector(disc, &(dir.get(jj, aa) * s), arg.get(jj, aa))?;
            total += f[vertex].pair(&zeta);
        }
        Ok(total)
    };
    let pair_nodes = |t: &'_ TangentField| {
        let g = grid;
        (0..=g.n_time)
            .flat_map(move |jj| (0..=g.n_space).map(move |aa| (jj, aa)))
            .filter(|&(jj, aa)| on_pair(jj, aa))
            .map(|(jj, aa)| t.get(jj, aa).clone())
            .collect::<Vec<_>>()
    };
    let hv = fd_step(eps, pair_nodes(v).iter());
    let hw = fd_step(eps, pair_nodes(w).iter());
    Ok(derivative(|s| theta(v, w, s), hv)? - derivative(|s| theta(w, v, s), hw)?)
}

/// Five-point central difference of `f` at zero.
fn derivative(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    Ok((8.0 * (f(h)? - f(-h)?) - (f(2.0 * h)? - f(-2.0 * h)?)) / (12.0 * h))
}

/// Difference step along a tangent: `eps` relative to its largest entry, so
/// that amplified tangents stay inside the retraction chart.
fn fd_step<'a>(eps: f64, tangents: impl Iterator<Item = &'a AlgebraVector>) -> f64 {
    let size = tangents.map(|t| t.amax()).fold(0.0, f64::max);
    eps / size.max(1.0)
}

/// Propagates the tangents `v` and `w` (inputs on slices 0 and 1 and on
/// prescribed nodes) through the stepper's linearization and evaluates the
/// symplectic two-form on every slice pair.
pub fn symplecticity_probe(
    stepper: &Stepper,
    field: &DiscreteField,
    evolution: Evolution,
    v: &mut TangentField,
    w: &mut TangentField,
    eps: f64,
) -> Result<SymplecticityReport> {
    let disc = &stepper.disc;
    disc.check_field(field)?;
    match evolution {
        Evolution::Time => {
            if stepper.regime == BoundaryRegime::SpaceEvolutionBvp {
                return Err(Error::RegimeMismatch("time evolution probe needs a time-marching regime".into()));
            }
            stepper.propagate_tangent_time(field, v, eps)?;
            stepper.propagate_tangent_time(field, w, eps)?;
        }
        Evolution::Space => {
            stepper.propagate_tangent_space(field, v, eps)?;
            stepper.propagate_tangent_space(field, w, eps)?;
        }
    }
    let grid = field.grid();
    let count = match evolution {
        Evolution::Time => grid.n_time,
        Evolution::Space => grid.n_space,
    };
    let values = (0..count)
        .map(|k| slice_two_form(disc, field, evolution, k, v, w, eps))
        .collect::<Result<_>>()?;
    Ok(SymplecticityReport { values })
}
