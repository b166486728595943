//! Discrete covariant Euler-Lagrange equations on a triangulated grid.
//!
//! For each triangle the discrete Lagrangian `L_d(g1, g2, g3)` has three
//! left-trivialized partial derivatives (the Legendre covectors)
//!
//! ```text
//! F1 = d_g Lbar - mu/dt - lambda/ds            (at g1 = g)
//! F2 = Ad*_{tau(dt xi)} mu / dt                (at g2 = g tau(dt xi))
//! F3 = Ad*_{tau(ds eta)} lambda / ds           (at g3 = g tau(ds eta))
//! ```
//!
//! The nodal residual at `(j, a)` sums the covectors of every triangle that
//! has `(j, a)` as a vertex. At interior nodes this is the DCEL residual;
//! at boundary nodes the same sum yields the zero-traction and
//! zero-momentum conditions.

use crate::error::{Error, Result};
use crate::field::{DiscreteField, Jet};
use crate::group::{check_dim, CoAlgebraVector};
use crate::model::{discrete_momenta, DensityModel};
use crate::retraction::Retraction;

/// Which boundary nodes are prescribed and which satisfy natural
/// conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRegime {
    /// Every boundary node is prescribed.
    SpaceTime,
    /// Initial and final time slices prescribed; zero traction at `a = 0`
    /// and `a = A`.
    TimeOnly,
    /// Spatial end slices prescribed; zero momentum at `j = 0` and `j = N`.
    SpaceOnly,
    /// Slice `a = 0` and its spatial derivative prescribed; zero momentum at
    /// `j = 0` and `j = N`; the field is marched in space.
    SpaceEvolutionBvp,
}

/// Discrete external forces, given as left-trivialized covectors acting on
/// the three vertices of a triangle.
pub trait DiscreteForces: Send + Sync {
    fn covectors(&self, jet: &Jet, dt: f64, ds: f64) -> Result<[CoAlgebraVector; 3]>;

    /// True when the spatial resultant of the three covectors vanishes for
    /// every jet, which preserves the full-group momentum maps.
    fn is_orthogonal(&self) -> bool;
}

/// Equal and opposite spatial forces on the two time-adjacent vertices of
/// each triangle: `F1 = -k dt ds xi`, `F2 = -Ad*_{tau(dt xi)} F1`, `F3 = 0`.
/// The spatial resultant vanishes, so the force is orthogonal to the full
/// group action. It exchanges energy with the field but does not dissipate
/// it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalCoupling {
    pub coefficient: f64,
}

impl DiscreteForces for InternalCoupling {
    fn covectors(&self, jet: &Jet, dt: f64, ds: f64) -> Result<[CoAlgebraVector; 3]> {
        let f1 = CoAlgebraVector(jet.xi.0.clone() * (-self.coefficient * dt * ds));
        let f2 = -jet.step_time.ad_star(&f1)?;
        let f3 = CoAlgebraVector::zeros(f1.dim());
        Ok([f1, f2, f3])
    }

    fn is_orthogonal(&self) -> bool {
        true
    }
}

/// Body-frame damping acting on the base vertex only: `F1 = -k dt ds xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyDamping {
    pub coefficient: f64,
}

impl DiscreteForces for BodyDamping {
    fn covectors(&self, jet: &Jet, dt: f64, ds: f64) -> Result<[CoAlgebraVector; 3]> {
        let n = jet.xi.dim();
        Ok([
            CoAlgebraVector(jet.xi.0.clone() * (-self.coefficient * dt * ds)),
            CoAlgebraVector::zeros(n),
            CoAlgebraVector::zeros(n),
        ])
    }

    fn is_orthogonal(&self) -> bool {
        false
    }
}

/// The three Legendre covectors of one triangle together with the momenta
/// they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleCovectors {
    pub mu: CoAlgebraVector,
    pub lambda: CoAlgebraVector,
    pub d_g: CoAlgebraVector,
    /// Conservative Legendre covectors `(F1, F2, F3)`.
    pub legendre: [CoAlgebraVector; 3],
    /// Force covectors, zero when no forces are attached.
    pub forces: [CoAlgebraVector; 3],
}

impl TriangleCovectors {
    /// `F^k + Fbar^k`.
    pub fn total(&self, k: usize) -> CoAlgebraVector {
        &self.legendre[k] + &self.forces[k]
    }
}

/// A density, a retraction and optional forces: everything needed to
/// evaluate the discrete equations on a field.
#[derive(Clone, Copy)]
pub struct Discretization<'a> {
    pub model: &'a dyn DensityModel,
    pub ret: &'a Retraction,
    pub forces: Option<&'a dyn DiscreteForces>,
}

impl<'a> Discretization<'a> {
    pub fn new(model: &'a dyn DensityModel, ret: &'a Retraction) -> Result<Self> {
        if model.group() != ret.group() {
            return Err(Error::VariantMismatch {
                expected: model.group(),
                found: ret.group(),
            });
        }
        Ok(Discretization {
            model,
            ret,
            forces: None,
        })
    }

    pub fn with_forces(mut self, forces: &'a dyn DiscreteForces) -> Self {
        self.forces = Some(forces);
        self
    }

    pub fn dt(&self) -> f64 {
        self.model.dt()
    }

    pub fn ds(&self) -> f64 {
        self.model.ds()
    }

    /// Checks that a field matches the density (group and steps).
    pub fn check_field(&self, field: &DiscreteField) -> Result<()> {
        if field.kind() != self.model.group() {
            return Err(Error::VariantMismatch {
                expected: self.model.group(),
                found: field.kind(),
            });
        }
        let g = field.grid();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
        if !close(g.dt, self.dt()) || !close(g.ds, self.ds()) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!(
                    "grid steps ({}, {}) differ from density steps ({}, {})",
                    g.dt,
                    g.ds,
                    self.dt(),
                    self.ds()
                ),
            });
        }
        Ok(())
    }

    pub fn jet(&self, field: &DiscreteField, j: usize, a: usize) -> Result<Jet> {
        field.jet(self.ret, j, a)
    }

    /// Legendre covectors (and forces) of a jet.
    pub fn covectors(&self, jet: &Jet) -> Result<TriangleCovectors> {
        let m = self.model;
        check_dim(m.group().algebra_dim(), jet.xi.dim())?;
        let (dt, ds) = (m.dt(), m.ds());
        let (mu, lambda) = discrete_momenta(m, self.ret, &jet.g, &jet.xi, &jet.eta)?;
        let d_g = m.d_g(&jet.g, &jet.xi, &jet.eta);
        let f1 = &(&d_g - &(&mu * (1.0 / dt))) - &(&lambda * (1.0 / ds));
        let f2 = jet.step_time.ad_star(&mu)? * (1.0 / dt);
        let f3 = jet.step_space.ad_star(&lambda)? * (1.0 / ds);
        let forces = match self.forces {
            Some(f) => f.covectors(jet, dt, ds)?,
            None => {
                let n = mu.dim();
                [
                    CoAlgebraVector::zeros(n),
                    CoAlgebraVector::zeros(n),
                    CoAlgebraVector::zeros(n),
                ]
            }
        };
        Ok(TriangleCovectors {
            mu,
            lambda,
            d_g,
            legendre: [f1, f2, f3],
            forces,
        })
    }

    pub fn triangle(&self, field: &DiscreteField, j: usize, a: usize) -> Result<TriangleCovectors> {
        let jet = self.jet(field, j, a)?;
        self.covectors(&jet)
    }

    /// Sum of the (forced) covectors of every triangle having `(j, a)` as a
    /// vertex.
    pub fn nodal_residual(&self, field: &DiscreteField, j: usize, a: usize) -> Result<CoAlgebraVector> {
        let grid = *field.grid();
        field.get(j, a)?;
        let mut r = CoAlgebraVector::zeros(field.kind().algebra_dim());
        if grid.is_triangle(j, a) {
            r += &self.triangle(field, j, a)?.total(0);
        }
        if j > 0 && grid.is_triangle(j - 1, a) {
            r += &self.triangle(field, j - 1, a)?.total(1);
        }
        if a > 0 && grid.is_triangle(j, a - 1) {
            r += &self.triangle(field, j, a - 1)?.total(2);
        }
        Ok(r)
    }

    /// DCEL residual at an interior node.
    pub fn interior_residual(&self, field: &DiscreteField, j: usize, a: usize) -> Result<CoAlgebraVector> {
        let grid = field.grid();
        if j == 0 || a == 0 || j >= grid.n_time || a >= grid.n_space {
            return Err(Error::IndexOutOfRange {
                what: "interior node",
                index: j * (grid.n_space + 1) + a,
                limit: grid.node_count(),
            });
        }
        self.nodal_residual(field, j, a)
    }

    /// Boundary equations imposed by a regime, as `((j, a), residual)`.
    pub fn boundary_residuals(
        &self,
        field: &DiscreteField,
        regime: BoundaryRegime,
    ) -> Result<Vec<((usize, usize), CoAlgebraVector)>> {
        boundary_equation_nodes(field, regime)
            .into_iter()
            .map(|(j, a)| Ok(((j, a), self.nodal_residual(field, j, a)?)))
            .collect()
    }

    /// Largest residual over every equation of a regime (interior plus
    /// boundary conditions).
    pub fn max_residual(&self, field: &DiscreteField, regime: BoundaryRegime) -> Result<f64> {
        let grid = field.grid();
        let mut worst: f64 = 0.0;
        for j in 1..grid.n_time {
            for a in 1..grid.n_space {
                worst = worst.max(self.nodal_residual(field, j, a)?.amax());
            }
        }
        for (_, r) in self.boundary_residuals(field, regime)? {
            worst = worst.max(r.amax());
        }
        Ok(worst)
    }
}

/// Boundary nodes at which a regime imposes a natural condition.
pub fn boundary_equation_nodes(field: &DiscreteField, regime: BoundaryRegime) -> Vec<(usize, usize)> {
    let g = field.grid();
    let (n, m) = (g.n_time, g.n_space);
    match regime {
        BoundaryRegime::SpaceTime => Vec::new(),
        BoundaryRegime::TimeOnly => (1..n).flat_map(|j| [(j, 0), (j, m)]).collect(),
        BoundaryRegime::SpaceOnly | BoundaryRegime::SpaceEvolutionBvp => {
            (1..m).flat_map(|a| [(0, a), (n, a)]).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use crate::group::{GroupElement, GroupKind};
    use crate::model::ScalarWaveModel;

    #[test]
    fn mismatched_retraction_is_rejected() {
        let m = ScalarWaveModel::new(1.0, 0.1, 0.1).unwrap();
        let r = Retraction::cayley(GroupKind::Se3);
        assert!(Discretization::new(&m, &r).is_err());
    }

    #[test]
    fn constant_field_has_zero_residual() {
        let m = ScalarWaveModel::new(1.0, 0.1, 0.1).unwrap();
        let r = Retraction::cayley(GroupKind::Rn(1));
        let d = Discretization::new(&m, &r).unwrap();
        let grid = GridSpec::new(3, 3, 0.1, 0.1).unwrap();
        let f = DiscreteField::filled(grid, GroupElement::rn(&[0.7]));
        assert_eq!(d.max_residual(&f, BoundaryRegime::TimeOnly).unwrap(), 0.0);
        assert!(d.interior_residual(&f, 0, 1).is_err());
    }
}
