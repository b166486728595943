//! Local diffeomorphisms `tau: g -> G` (Cayley map and exponential map),
//! their inverses and right-trivialized tangent maps.
//!
//! For `x` in the algebra, `dtau_r(x)` is the matrix of
//! `y -> vee( D tau(x).y  tau(x)^{-1} )`. Dual maps are transposes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Matrix4, Vector3};

use crate::error::{Error, Result};
use crate::group::{check_dim, skew, unskew, AlgebraVector, GroupElement, GroupKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetractionKind {
    Cayley,
    Exponential,
}

/// A retraction on a fixed group. On `R^n` both kinds reduce to the
/// identity map `x -> x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retraction {
    kind: RetractionKind,
    group: GroupKind,
    angle_bound: f64,
}

/// Rotation angle of `r` in `[0, pi]`.
pub fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let s = unskew(r).norm();
    let c = 0.5 * (r.trace() - 1.0);
    s.atan2(c)
}

impl Retraction {
    /// Default domain bound: rotation angles up to `pi - 0.1`.
    pub const DEFAULT_ANGLE_BOUND: f64 = PI - 0.1;

    pub fn new(kind: RetractionKind, group: GroupKind) -> Self {
        Retraction {
            kind,
            group,
            angle_bound: Self::DEFAULT_ANGLE_BOUND,
        }
    }

    pub fn cayley(group: GroupKind) -> Self {
        Self::new(RetractionKind::Cayley, group)
    }

    pub fn exponential(group: GroupKind) -> Self {
        Self::new(RetractionKind::Exponential, group)
    }

    pub fn with_angle_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound < PI) {
            return Err(Error::InvalidParameter {
                name: "angle_bound",
                reason: format!("must lie in (0, pi), got {bound}"),
            });
        }
        self.angle_bound = bound;
        Ok(self)
    }

    pub fn kind(&self) -> RetractionKind {
        self.kind
    }

    pub fn group(&self) -> GroupKind {
        self.group
    }

    pub fn angle_bound(&self) -> f64 {
        self.angle_bound
    }

    /// Bound on the norm of the angular part of `x` inside which
    /// `tau_inv(tau(x)) == x` holds. Infinite for `R^n`.
    pub fn validity_radius(&self) -> f64 {
        match (self.group, self.kind) {
            (GroupKind::Rn(_), _) => f64::INFINITY,
            (_, RetractionKind::Cayley) => 2.0 * (0.5 * self.angle_bound).tan(),
            (_, RetractionKind::Exponential) => self.angle_bound,
        }
    }

    fn angular(x: &AlgebraVector) -> Vector3<f64> {
        Vector3::new(x[0], x[1], x[2])
    }

    fn linear(x: &AlgebraVector) -> Vector3<f64> {
        Vector3::new(x[3], x[4], x[5])
    }

    pub fn tau(&self, x: &AlgebraVector) -> Result<GroupElement> {
        check_dim(self.group.algebra_dim(), x.dim())?;
        if !x.is_finite() {
            return Err(Error::NonFinite(format!("retraction argument {x}")));
        }
        Ok(match self.group {
            GroupKind::Rn(_) => GroupElement::Rn(x.0.clone()),
            GroupKind::So3 => GroupElement::So3 {
                rot: self.rot(&Self::angular(x)),
            },
            GroupKind::Se3 => {
                let w = Self::angular(x);
                let v = Self::linear(x);
                let (rot, trans) = match self.kind {
                    RetractionKind::Cayley => (cayley_so3(&w), cayley_factor(&w) * v),
                    RetractionKind::Exponential => (exp_so3(&w), left_jacobian_so3(&w) * v),
                };
                GroupElement::Se3 { rot, trans }
            }
        })
    }

    fn rot(&self, w: &Vector3<f64>) -> Matrix3<f64> {
        match self.kind {
            RetractionKind::Cayley => cayley_so3(w),
            RetractionKind::Exponential => exp_so3(w),
        }
    }

    fn check_angle(&self, r: &Matrix3<f64>) -> Result<()> {
        let angle = rotation_angle(r);
        if !(angle <= self.angle_bound) {
            return Err(Error::RetractionDomain {
                angle,
                bound: self.angle_bound,
            });
        }
        Ok(())
    }

    fn rot_inv(&self, r: &Matrix3<f64>) -> Result<Vector3<f64>> {
        self.check_angle(r)?;
        Ok(match self.kind {
            RetractionKind::Cayley => {
                // w = 2 vee(R - R^T) / (1 + tr R)
                let s = 2.0 / (1.0 + r.trace());
                unskew(r) * (2.0 * s)
            }
            RetractionKind::Exponential => log_so3(r),
        })
    }

    pub fn tau_inv(&self, g: &GroupElement) -> Result<AlgebraVector> {
        if g.kind() != self.group {
            return Err(Error::VariantMismatch {
                expected: self.group,
                found: g.kind(),
            });
        }
        Ok(match g {
            GroupElement::Rn(v) => AlgebraVector(v.clone()),
            GroupElement::So3 { rot } => {
                let w = self.rot_inv(rot)?;
                AlgebraVector::from_slice(w.as_slice())
            }
            GroupElement::Se3 { rot, trans } => {
                let w = self.rot_inv(rot)?;
                let v = match self.kind {
                    RetractionKind::Cayley => (Matrix3::identity() - 0.5 * skew(&w)) * trans,
                    RetractionKind::Exponential => left_jacobian_inv_so3(&w) * trans,
                };
                AlgebraVector::from_vec(vec![w[0], w[1], w[2], v[0], v[1], v[2]])
            }
        })
    }

    /// Right-trivialized tangent map `dR tau_x` as a matrix.
    pub fn dtau_r(&self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        check_dim(self.group.algebra_dim(), x.dim())?;
        Ok(match self.group {
            GroupKind::Rn(n) => DMatrix::identity(n, n),
            GroupKind::So3 => {
                let w = Self::angular(x);
                let m = match self.kind {
                    RetractionKind::Cayley => {
                        (2.0 / (4.0 + w.norm_squared())) * (2.0 * Matrix3::identity() + skew(&w))
                    }
                    RetractionKind::Exponential => left_jacobian_so3(&w),
                };
                to_dmatrix3(&m)
            }
            GroupKind::Se3 => {
                let w = Self::angular(x);
                match self.kind {
                    RetractionKind::Cayley => {
                        let v = Self::linear(x);
                        let f = cayley_factor(&w);
                        let g = cayley_factor(&-w);
                        let a = homogeneous(&f, &(f * v * 0.5));
                        let b = homogeneous(&g, &(g * v * -0.5));
                        sandwich_se3(&a, &b)
                    }
                    RetractionKind::Exponential => {
                        let j = left_jacobian_so3(&w);
                        let q = se3_q_block(&w, &Self::linear(x));
                        block_lower(&j, &q)
                    }
                }
            }
        })
    }

    /// Inverse of [`Retraction::dtau_r`] computed from its own closed form.
    pub fn dtau_r_inv(&self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        check_dim(self.group.algebra_dim(), x.dim())?;
        Ok(match self.group {
            GroupKind::Rn(n) => DMatrix::identity(n, n),
            GroupKind::So3 => {
                let w = Self::angular(x);
                let m = match self.kind {
                    RetractionKind::Cayley => {
                        Matrix3::identity() - 0.5 * skew(&w) + 0.25 * w * w.transpose()
                    }
                    RetractionKind::Exponential => left_jacobian_inv_so3(&w),
                };
                to_dmatrix3(&m)
            }
            GroupKind::Se3 => {
                let w = Self::angular(x);
                match self.kind {
                    RetractionKind::Cayley => {
                        let xh = hat4(x);
                        let id = Matrix4::identity();
                        sandwich_se3(&(id - 0.5 * xh), &(id + 0.5 * xh))
                    }
                    RetractionKind::Exponential => {
                        let ji = left_jacobian_inv_so3(&w);
                        let q = se3_q_block(&w, &Self::linear(x));
                        block_lower(&ji, &(-(ji * q * ji)))
                    }
                }
            }
        })
    }

    /// Dual map `(dR tau_x)^*`.
    pub fn dtau_r_dual(&self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        Ok(self.dtau_r(x)?.transpose())
    }

    /// Dual map `(dR tau_x^{-1})^*`.
    pub fn dtau_r_inv_dual(&self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        Ok(self.dtau_r_inv(x)?.transpose())
    }

    /// Left-trivialized tangent map: `y -> vee( tau(x)^{-1} D tau(x).y )`.
    pub fn dtau_l(&self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        let t = self.tau(x)?;
        Ok(t.inverse().adjoint() * self.dtau_r(x)?)
    }
}

fn to_dmatrix3(m: &Matrix3<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

fn block_lower(diag: &Matrix3<f64>, lower: &Matrix3<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(diag);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(diag);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(lower);
    m
}

fn homogeneous(r: &Matrix3<f64>, t: &Vector3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(r);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
    m
}

fn hat4(x: &AlgebraVector) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    let s = skew(&Vector3::new(x[0], x[1], x[2]));
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&s);
    for i in 0..3 {
        m[(i, 3)] = x[3 + i];
    }
    m
}

/// Matrix of `y -> vee(A hat(y) B)` on se(3).
fn sandwich_se3(a: &Matrix4<f64>, b: &Matrix4<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(6, 6);
    for i in 0..6 {
        let e = AlgebraVector::basis(6, i);
        let m = a * hat4(&e) * b;
        let r: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
        let w = unskew(&r);
        for k in 0..3 {
            out[(k, i)] = w[k];
            out[(3 + k, i)] = m[(k, 3)];
        }
    }
    out
}

/// `(I - w^/2)^{-1}`.
fn cayley_factor(w: &Vector3<f64>) -> Matrix3<f64> {
    let s = skew(w);
    Matrix3::identity() + (2.0 * s + s * s) / (4.0 + w.norm_squared())
}

pub fn cayley_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let s = skew(w);
    Matrix3::identity() + (4.0 / (4.0 + w.norm_squared())) * (s + 0.5 * s * s)
}

/// Evaluates `sum_m (-1)^m t^m / (2m + k)!` with `t = theta^2`, together with
/// an optional per-term weight.
fn alternating_series(t: f64, k: u32, weight: impl Fn(u32) -> f64) -> f64 {
    let mut fact = (1..=k).fold(1.0, |acc, i| acc * i as f64);
    let mut pow = 1.0;
    let mut sum = 0.0;
    for m in 0..14u32 {
        if m > 0 {
            let n = 2 * m + k;
            fact *= ((n - 1) * n) as f64;
            pow *= -t;
        }
        sum += weight(m) * pow / fact;
    }
    sum
}

/// Coefficients `(1 - cos t)/t^2` and `(t - sin t)/t^3`.
fn so3_coefficients(theta: f64) -> (f64, f64) {
    if theta < 1.0 {
        let t = theta * theta;
        (
            alternating_series(t, 2, |_| 1.0),
            alternating_series(t, 3, |_| 1.0),
        )
    } else {
        let t2 = theta * theta;
        ((1.0 - theta.cos()) / t2, (theta - theta.sin()) / (t2 * theta))
    }
}

pub fn exp_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let s = skew(w);
    let a = if theta < 1.0 {
        alternating_series(theta * theta, 1, |_| 1.0)
    } else {
        theta.sin() / theta
    };
    let (b, _) = so3_coefficients(theta);
    Matrix3::identity() + a * s + b * s * s
}

/// Principal logarithm; valid for rotation angles below `pi`.
pub fn log_so3(r: &Matrix3<f64>) -> Vector3<f64> {
    let v = unskew(r);
    let s = v.norm();
    let theta = s.atan2(0.5 * (r.trace() - 1.0));
    if s < 1e-300 {
        return Vector3::zeros();
    }
    v * (theta / s)
}

/// Left Jacobian of SO(3), the right-trivialized derivative of `exp`.
pub fn left_jacobian_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let (a, b) = so3_coefficients(w.norm());
    let s = skew(w);
    Matrix3::identity() + a * s + b * s * s
}

pub fn left_jacobian_inv_so3(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let t = theta * theta;
    let d = if theta < 0.5 {
        1.0 / 12.0 + t / 720.0 + t * t / 30240.0 + t * t * t / 1209600.0 + t * t * t * t / 47900160.0
    } else {
        (1.0 - 0.5 * theta / (0.5 * theta).tan()) / t
    };
    let s = skew(w);
    Matrix3::identity() - 0.5 * s + d * s * s
}

/// Lower-left block of the SE(3) left Jacobian in (angular; linear) order.
fn se3_q_block(w: &Vector3<f64>, v: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let t = theta * theta;
    let (c2, c3, c4) = if theta < 1.0 {
        (
            alternating_series(t, 3, |_| 1.0),
            alternating_series(t, 4, |_| 1.0),
            alternating_series(t, 5, |m| (m + 1) as f64),
        )
    } else {
        let (s, c) = theta.sin_cos();
        (
            (theta - s) / (t * theta),
            (t + 2.0 * c - 2.0) / (2.0 * t * t),
            (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t * t * theta),
        )
    };
    let p = skew(w);
    let r = skew(v);
    let prp = p * r * p;
    0.5 * r + c2 * (p * r + r * p + prp) + c3 * (p * p * r + r * p * p - 3.0 * prp)
        + c4 * (prp * p + p * prp)
}
