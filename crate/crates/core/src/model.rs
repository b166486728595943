//! Discrete Lagrangian densities `Lbar(g, xi, eta)` on a single triangle.
//!
//! Values are actions per cell, i.e. they already include the factor
//! `dt * ds`. `d_g` is the left-trivialized group derivative
//! `x -> d/de Lbar(g exp(e x), xi, eta)` at `e = 0`.

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};
use crate::group::{AlgebraVector, CoAlgebraVector, GroupElement, GroupKind};
use crate::retraction::Retraction;

/// Symmetry group declared by a density.
#[derive(Debug, Clone, PartialEq)]
pub enum Symmetry {
    /// Invariant under left multiplication by the whole group.
    Full,
    /// Invariant under the subgroup whose algebra is spanned by the columns
    /// of `inclusion` (a `dim g x dim h` matrix).
    Subgroup { inclusion: DMatrix<f64> },
    /// No continuous symmetry. Momentum maps are still defined but are not
    /// conserved.
    Broken,
}

impl Symmetry {
    /// Dual of the inclusion `h -> g`, mapping `g*` to `h*`.
    pub fn restrict(&self, m: &CoAlgebraVector) -> CoAlgebraVector {
        match self {
            Symmetry::Subgroup { inclusion } => CoAlgebraVector(inclusion.transpose() * &m.0),
            Symmetry::Full | Symmetry::Broken => m.clone(),
        }
    }

    pub fn is_conserving(&self) -> bool {
        !matches!(self, Symmetry::Broken)
    }
}

pub trait DensityModel: Send + Sync {
    fn group(&self) -> GroupKind;
    fn dt(&self) -> f64;
    fn ds(&self) -> f64;
    fn evaluate(&self, g: &GroupElement, xi: &AlgebraVector, eta: &AlgebraVector) -> f64;
    fn d_g(&self, g: &GroupElement, xi: &AlgebraVector, eta: &AlgebraVector) -> CoAlgebraVector;
    fn d_xi(&self, g: &GroupElement, xi: &AlgebraVector, eta: &AlgebraVector) -> CoAlgebraVector;
    fn d_eta(&self, g: &GroupElement, xi: &AlgebraVector, eta: &AlgebraVector) -> CoAlgebraVector;
    fn symmetry(&self) -> Symmetry;
}

/// Discrete momenta `(mu, lambda)`:
/// `mu = (dR tau^{-1}_{dt xi})^* D_xi Lbar` and
/// `lambda = (dR tau^{-1}_{ds eta})^* D_eta Lbar`.
pub fn discrete_momenta(
    model: &dyn DensityModel,
    ret: &Retraction,
    g: &GroupElement,
    xi: &AlgebraVector,
    eta: &AlgebraVector,
) -> Result<(CoAlgebraVector, CoAlgebraVector)> {
    let dxi = model.d_xi(g, xi, eta);
    let deta = model.d_eta(g, xi, eta);
    let mu = ret.dtau_r_inv_dual(&(xi * model.dt()))? * &dxi.0;
    let lambda = ret.dtau_r_inv_dual(&(eta * model.ds()))? * &deta.0;
    Ok((CoAlgebraVector(mu), CoAlgebraVector(lambda)))
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {value}"),
        })
    }
}

/// Material and cross-section data of a beam with square cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameters {
    /// Side length of the square cross-section.
    pub side: f64,
    pub density: f64,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl BeamParameters {
    pub fn validate(&self) -> Result<()> {
        positive("side", self.side)?;
        positive("density", self.density)?;
        positive("youngs_modulus", self.youngs_modulus)?;
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio <= 0.5) {
            return Err(Error::InvalidParameter {
                name: "poisson_ratio",
                reason: format!("must lie in (-1, 0.5], got {}", self.poisson_ratio),
            });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    /// Second moment of area about either principal axis.
    pub fn second_moment(&self) -> f64 {
        self.side.powi(4) / 12.0
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// Diagonal of the inertia operator (angular; linear).
    pub fn inertia(&self) -> [f64; 6] {
        let i = self.second_moment();
        let m = self.density * self.area();
        let r = self.density;
        [r * i, r * i, r * 2.0 * i, m, m, m]
    }

    /// Diagonal of the stiffness operator (bending, bending, torsion; shear,
    /// shear, extension).
    pub fn stiffness(&self) -> [f64; 6] {
        let i = self.second_moment();
        let e = self.youngs_modulus;
        let g = self.shear_modulus();
        let a = self.area();
        [e * i, e * i, g * 2.0 * i, g * a, g * a, e * a]
    }
}

/// External potential for the beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamPotential {
    None,
    /// Uniform gravitational field with acceleration vector `accel`;
    /// potential density `-rho A <accel, r>`.
    Gravity { accel: Vector3<f64> },
}

/// Geometrically exact beam on SE(3):
/// `Lbar = dt ds [ 1/2 <J xi, xi> - 1/2 <C (eta - E6), eta - E6> - Pi(g) ]`.
#[derive(Debug, Clone)]
pub struct BeamModel {
    params: BeamParameters,
    dt: f64,
    ds: f64,
    inertia: [f64; 6],
    stiffness: [f64; 6],
    potential: BeamPotential,
}

impl BeamModel {
    pub fn new(params: BeamParameters, dt: f64, ds: f64) -> Result<Self> {
        params.validate()?;
        Ok(BeamModel {
            params,
            dt: positive("dt", dt)?,
            ds: positive("ds", ds)?,
            inertia: params.inertia(),
            stiffness: params.stiffness(),
            potential: BeamPotential::None,
        })
    }

    pub fn with_potential(mut self, potential: BeamPotential) -> Result<Self> {
        if let BeamPotential::Gravity { accel } = potential {
            if !accel.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "gravity",
                    reason: "acceleration must be finite".into(),
                });
            }
        }
        self.potential = potential;
        Ok(self)
    }

    pub fn params(&self) -> &BeamParameters {
        &self.params
    }

    pub fn inertia(&self) -> &[f64; 6] {
        &self.inertia
    }

    pub fn stiffness(&self) -> &[f64; 6] {
        &self.stiffness
    }

    pub fn potential(&self) -> BeamPotential {
        self.potential
    }

    /// Kinetic energy density `1/2 <J xi, xi>`.
    pub fn kinetic(&self, xi: &AlgebraVector) -> f64 {
        0.5 * (0..6).map(|i| self.inertia[i] * xi[i] * xi[i]).sum::<f64>()
    }

    /// Strain energy density `1/2 <C (eta - E6), eta - E6>`.
    pub fn strain_energy(&self, eta: &AlgebraVector) -> f64 {
        0.5 * (0..6)
            .map(|i| {
                let e = eta[i] - if i == 5 { 1.0 } else { 0.0 };
                self.stiffness[i] * e * e
            })
            .sum::<f64>()
    }

    /// External potential density.
    pub fn potential_energy(&self, g: &GroupElement) -> f64 {
        match (self.potential, g.translation_part()) {
            (BeamPotential::Gravity { accel }, Some(r)) => {
                -self.params.density * self.params.area() * accel.dot(r)
            }
            _ => 0.0,
        }
    }
}

impl DensityModel for BeamModel {
    fn group(&self) -> GroupKind {
        GroupKind::Se3
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn ds(&self) -> f64 {
        self.ds
    }

    fn evaluate(&self, g: &GroupElement, xi: &AlgebraVector, eta: &AlgebraVector) -> f64 {
        self.dt
            * self.ds
            * (self.kinetic(xi) - self.strain_energy(eta) - self.potential_energy(g))
    }

    fn d_g(&self, g: &GroupElement, _xi: &AlgebraVector, _eta: &AlgebraVector) -> CoAlgebraVector {
        let mut out = CoAlgebraVector::zeros(6);
        if let (BeamPotential::Gravity { accel }, Some(rot)) = (self.potential, g.rotation()) {
            let f = rot.transpose() * accel
                * (self.params.density * self.params.area() * self.dt * self.ds);
            for i in 0..3 {
                out[3 + i] = f[i];
            }
        }
        out
    }

    fn d_xi(&self, _g: &GroupElement, xi: &AlgebraVector, _eta: &AlgebraVector) -> CoAlgebraVector {
        let s = self.dt * self.ds;
        CoAlgebraVector::from_vec((0..6).map(|i| s * self.inertia[i] * xi[i]).collect())
    }

    fn d_eta(&self, _g: &GroupElement, _xi: &AlgebraVector, eta: &AlgebraVector) -> CoAlgebraVector {
        let s = self.dt * self.ds;
        CoAlgebraVector::from_vec(
            (0..6)
                .map(|i| {
                    let e = eta[i] - if i == 5 { 1.0 } else { 0.0 };
                    -s * self.stiffness[i] * e
                })
                .collect(),
        )
    }

    fn symmetry(&self) -> Symmetry {
        match self.potential {
            BeamPotential::None => Symmetry::Full,
            BeamPotential::Gravity { accel } => {
                let n = accel.norm();
                if n == 0.0 {
                    return Symmetry::Full;
                }
                // Rotations about the field direction and translations
                // orthogonal to it.
                let k = accel / n;
                let helper = if k[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                let e1 = k.cross(&helper).normalize();
                let e2 = k.cross(&e1);
                let mut inc = DMatrix::zeros(6, 3);
                for i in 0..3 {
                    inc[(i, 0)] = k[i];
                    inc[(3 + i, 1)] = e1[i];
                    inc[(3 + i, 2)] = e2[i];
                }
                Symmetry::Subgroup { inclusion: inc }
            }
        }
    }
}

/// On-site potential for the scalar wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WavePotential {
    None,
    /// `1/2 m^2 y^2`.
    KleinGordon { mass: f64 },
    /// `k (1 - cos y)`.
    SineGordon { strength: f64 },
}

/// Scalar wave on the abelian group R:
/// `Lbar = dt ds [ 1/2 xi^2 - 1/2 c^2 eta^2 - V(y) ]`.
#[derive(Debug, Clone)]
pub struct ScalarWaveModel {
    speed: f64,
    dt: f64,
    ds: f64,
    potential: WavePotential,
}

impl ScalarWaveModel {
    pub fn new(speed: f64, dt: f64, ds: f64) -> Result<Self> {
        Ok(ScalarWaveModel {
            speed: positive("speed", speed)?,
            dt: positive("dt", dt)?,
            ds: positive("ds", ds)?,
            potential: WavePotential::None,
        })
    }

    pub fn with_potential(mut self, potential: WavePotential) -> Result<Self> {
        let v = match potential {
            WavePotential::None => 0.0,
            WavePotential::KleinGordon { mass } => mass,
            WavePotential::SineGordon { strength } => strength,
        };
        if !v.is_finite() {
            return Err(Error::InvalidParameter {
                name: "potential",
                reason: format!("coefficient must be finite, got {v}"),
            });
        }
        self.potential = potential;
        Ok(self)
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    fn value(g: &GroupElement) -> f64 {
        match g {
            GroupElement::Rn(v) => v[0],
            _ => panic!("scalar wave evaluated on a non-abelian element"),
        }
    }

    fn site_potential(&self, y: f64) -> (f64, f64) {
        match self.potential {
            WavePotential::None => (0.0, 0.0),
            WavePotential::KleinGordon { mass } => (0.5 * mass * mass * y * y, mass * mass * y),
            WavePotential::SineGordon { strength } => (strength * (1.0 - y.cos()), strength * y.sin()),
        }
    }
}

impl DensityModel for ScalarWaveModel {
    fn group(&self) -> GroupKind {
        GroupKind::Rn(1)
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn ds(&self) -> f64 {
        self.ds
    }

    fn evaluate(&self, g: &GroupElement, xi: &AlgebraVector, eta: &AlgebraVector) -> f64 {
        let (v, _) = self.site_potential(Self::value(g));
        let c2 = self.speed * self.speed;
        self.dt * self.ds * (0.5 * xi[0] * xi[0] - 0.5 * c2 * eta[0] * eta[0] - v)
    }

    fn d_g(&self, g: &GroupElement, _xi: &AlgebraVector, _eta: &AlgebraVector) -> CoAlgebraVector {
        let (_, dv) = self.site_potential(Self::value(g));
        CoAlgebraVector::from_vec(vec![-self.dt * self.ds * dv])
    }

    fn d_xi(&self, _g: &GroupElement, xi: &AlgebraVector, _eta: &AlgebraVector) -> CoAlgebraVector {
        CoAlgebraVector::from_vec(vec![self.dt * self.ds * xi[0]])
    }

    fn d_eta(&self, _g: &GroupElement, _xi: &AlgebraVector, eta: &AlgebraVector) -> CoAlgebraVector {
        let c2 = self.speed * self.speed;
        CoAlgebraVector::from_vec(vec![-self.dt * self.ds * c2 * eta[0]])
    }

    fn symmetry(&self) -> Symmetry {
        match self.potential {
            WavePotential::None => Symmetry::Full,
            _ => Symmetry::Broken,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn steel() -> BeamParameters {
        BeamParameters {
            side: 0.01,
            density: 7850.0,
            youngs_modulus: 2.0e11,
            poisson_ratio: 0.3,
        }
    }

    #[test]
    fn rest_state_is_stationary() {
        let m = BeamModel::new(steel(), 0.04, 0.02).unwrap();
        let g = GroupElement::identity(GroupKind::Se3);
        let xi = AlgebraVector::zeros(6);
        let eta = AlgebraVector::basis(6, 5);
        assert_eq!(m.evaluate(&g, &xi, &eta), 0.0);
        assert_eq!(m.d_xi(&g, &xi, &eta).amax(), 0.0);
        assert_eq!(m.d_eta(&g, &xi, &eta).amax(), 0.0);
    }

    #[test]
    fn inertia_and_stiffness_follow_cross_section() {
        let p = steel();
        let i = 1e-8 / 12.0;
        let j = p.inertia();
        assert!((j[0] - 7850.0 * i).abs() < 1e-18);
        assert!((j[2] - 2.0 * 7850.0 * i).abs() < 1e-18);
        assert!((j[3] - 7850.0 * 1e-4).abs() < 1e-15);
        let c = p.stiffness();
        assert!((c[5] - 2.0e11 * 1e-4).abs() < 1e-6);
        assert!((c[3] - 2.0e11 / 2.6 * 1e-4).abs() < 1e-6);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut p = steel();
        p.side = -1.0;
        assert!(BeamModel::new(p, 0.1, 0.1).is_err());
        let mut p = steel();
        p.poisson_ratio = 0.7;
        assert!(BeamModel::new(p, 0.1, 0.1).is_err());
        assert!(BeamModel::new(steel(), 0.0, 0.1).is_err());
        assert!(ScalarWaveModel::new(-1.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn gravity_symmetry_annihilates_group_derivative() {
        let m = BeamModel::new(steel(), 0.1, 0.1)
            .unwrap()
            .with_potential(BeamPotential::Gravity {
                accel: Vector3::new(0.0, 0.0, -9.81),
            })
            .unwrap();
        let g = GroupElement::translation(Vector3::new(0.3, -0.2, 1.0));
        let xi = AlgebraVector::zeros(6);
        let eta = AlgebraVector::basis(6, 5);
        let dg = m.d_g(&g, &xi, &eta);
        let spatial = g.inverse().ad_star(&dg).unwrap();
        let restricted = m.symmetry().restrict(&spatial);
        assert!(restricted.amax() < 1e-15);
    }
}
