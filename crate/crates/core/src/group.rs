//! Matrix Lie groups SE(3), SO(3) and the abelian group R^n, their algebras
//! and dual spaces.
//!
//! Algebra coordinates for se(3) are ordered (angular; linear), i.e.
//! `x = (w1, w2, w3, v1, v2, v3)` with hat matrix `[[w^, v], [0, 0]]`.
//! The coadjoint action is `Ad*_g := (Ad_g)^T` in these coordinates.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};

/// Skew-symmetric matrix with `skew(w) * v == w.cross(&v)`.
pub fn skew(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

/// Inverse of [`skew`] applied to the antisymmetric part of `m`.
pub fn unskew(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Which group a value lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    Se3,
    So3,
    Rn(usize),
}

impl GroupKind {
    /// Dimension of the Lie algebra.
    pub fn algebra_dim(self) -> usize {
        match self {
            GroupKind::Se3 => 6,
            GroupKind::So3 => 3,
            GroupKind::Rn(n) => n,
        }
    }

    /// Size of the square matrices representing group and algebra elements.
    pub fn matrix_dim(self) -> usize {
        match self {
            GroupKind::Se3 => 4,
            GroupKind::So3 => 3,
            GroupKind::Rn(n) => n + 1,
        }
    }

    pub fn is_abelian(self) -> bool {
        matches!(self, GroupKind::Rn(_))
    }

    /// Ad of an algebra element: `ad_x y = [x, y]`.
    pub fn ad(self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        check_dim(self.algebra_dim(), x.dim())?;
        Ok(match self {
            GroupKind::Se3 => {
                let w = Vector3::new(x[0], x[1], x[2]);
                let v = Vector3::new(x[3], x[4], x[5]);
                let mut m = DMatrix::zeros(6, 6);
                let ws = skew(&w);
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(&ws);
                m.fixed_view_mut::<3, 3>(3, 3).copy_from(&ws);
                m.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&v));
                m
            }
            GroupKind::So3 => {
                let w = Vector3::new(x[0], x[1], x[2]);
                let s = skew(&w);
                DMatrix::from_fn(3, 3, |i, j| s[(i, j)])
            }
            GroupKind::Rn(n) => DMatrix::zeros(n, n),
        })
    }

    /// Lie bracket `[x, y]`.
    pub fn bracket(self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        check_dim(self.algebra_dim(), y.dim())?;
        Ok(AlgebraVector(self.ad(x)? * &y.0))
    }

    /// Coadjoint action of the algebra: `ad*_x m = (ad_x)^T m`.
    pub fn ad_star(self, x: &AlgebraVector, m: &CoAlgebraVector) -> Result<CoAlgebraVector> {
        check_dim(self.algebra_dim(), m.dim())?;
        Ok(CoAlgebraVector(self.ad(x)?.transpose() * &m.0))
    }

    /// Matrix form of an algebra element.
    pub fn hat(self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        check_dim(self.algebra_dim(), x.dim())?;
        let d = self.matrix_dim();
        let mut m = DMatrix::zeros(d, d);
        match self {
            GroupKind::Se3 => {
                let s = skew(&Vector3::new(x[0], x[1], x[2]));
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(&s);
                for i in 0..3 {
                    m[(i, 3)] = x[3 + i];
                }
            }
            GroupKind::So3 => {
                let s = skew(&Vector3::new(x[0], x[1], x[2]));
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(&s);
            }
            GroupKind::Rn(n) => {
                for i in 0..n {
                    m[(i, n)] = x[i];
                }
            }
        }
        Ok(m)
    }

    /// Inverse of [`GroupKind::hat`]. Rejects matrices whose structural
    /// defect (distance from the algebra) exceeds `tol`.
    pub fn vee(self, m: &DMatrix<f64>, tol: f64) -> Result<AlgebraVector> {
        let d = self.matrix_dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        let x = match self {
            GroupKind::Se3 | GroupKind::So3 => {
                let b: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
                let w = unskew(&b);
                let mut v = vec![w[0], w[1], w[2]];
                if self == GroupKind::Se3 {
                    v.extend((0..3).map(|i| m[(i, 3)]));
                }
                AlgebraVector::from_vec(v)
            }
            GroupKind::Rn(n) => AlgebraVector::from_vec((0..n).map(|i| m[(i, n)]).collect()),
        };
        let defect = (self.hat(&x)? - m).amax();
        if defect > tol {
            return Err(Error::NotInAlgebra { defect });
        }
        Ok(x)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}

macro_rules! coordinate_vector {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub DVector<f64>);

        impl $name {
            pub fn zeros(dim: usize) -> Self {
                Self(DVector::zeros(dim))
            }
            pub fn from_vec(v: Vec<f64>) -> Self {
                Self(DVector::from_vec(v))
            }
            pub fn from_slice(v: &[f64]) -> Self {
                Self(DVector::from_column_slice(v))
            }
            /// Unit vector along coordinate `i`.
            pub fn basis(dim: usize, i: usize) -> Self {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                Self(v)
            }
            pub fn dim(&self) -> usize {
                self.0.len()
            }
            pub fn as_slice(&self) -> &[f64] {
                self.0.as_slice()
            }
            pub fn norm(&self) -> f64 {
                self.0.norm()
            }
            pub fn amax(&self) -> f64 {
                self.0.amax()
            }
            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|x| x.is_finite())
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.0[i]
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl<'a> Add<&'a $name> for &'a $name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name(&self.0 + &rhs.0)
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        impl<'a> Sub<&'a $name> for &'a $name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name(&self.0 - &rhs.0)
            }
        }

        impl AddAssign<&$name> for $name {
            fn add_assign(&mut self, rhs: &$name) {
                self.0 += &rhs.0;
            }
        }

        impl SubAssign<&$name> for $name {
            fn sub_assign(&mut self, rhs: &$name) {
                self.0 -= &rhs.0;
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-self.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = $name;
            fn mul(self, s: f64) -> $name {
                $name(self.0 * s)
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, s: f64) -> $name {
                $name(&self.0 * s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (i, x) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    };
}

coordinate_vector!(AlgebraVector, "Coordinates of a Lie algebra element.");
coordinate_vector!(CoAlgebraVector, "Coordinates of an element of the dual of the Lie algebra.");

impl CoAlgebraVector {
    /// Duality pairing `<m, x>`.
    pub fn pair(&self, x: &AlgebraVector) -> f64 {
        self.0.dot(&x.0)
    }
}

/// An element of SE(3), SO(3) or R^n.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Se3 { rot: Matrix3<f64>, trans: Vector3<f64> },
    So3 { rot: Matrix3<f64> },
    Rn(DVector<f64>),
}

impl GroupElement {
    pub fn identity(kind: GroupKind) -> Self {
        match kind {
            GroupKind::Se3 => GroupElement::Se3 {
                rot: Matrix3::identity(),
                trans: Vector3::zeros(),
            },
            GroupKind::So3 => GroupElement::So3 {
                rot: Matrix3::identity(),
            },
            GroupKind::Rn(n) => GroupElement::Rn(DVector::zeros(n)),
        }
    }

    pub fn se3(rot: Matrix3<f64>, trans: Vector3<f64>) -> Self {
        GroupElement::Se3 { rot, trans }
    }

    pub fn translation(trans: Vector3<f64>) -> Self {
        GroupElement::Se3 {
            rot: Matrix3::identity(),
            trans,
        }
    }

    pub fn rn(v: &[f64]) -> Self {
        GroupElement::Rn(DVector::from_column_slice(v))
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupElement::Se3 { .. } => GroupKind::Se3,
            GroupElement::So3 { .. } => GroupKind::So3,
            GroupElement::Rn(v) => GroupKind::Rn(v.len()),
        }
    }

    fn same_kind(&self, other: &GroupElement) -> Result<()> {
        if self.kind() != other.kind() {
            Err(Error::VariantMismatch {
                expected: self.kind(),
                found: other.kind(),
            })
        } else {
            Ok(())
        }
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        self.same_kind(other)?;
        Ok(match (self, other) {
            (GroupElement::Se3 { rot: r1, trans: t1 }, GroupElement::Se3 { rot: r2, trans: t2 }) => {
                GroupElement::Se3 {
                    rot: r1 * r2,
                    trans: r1 * t2 + t1,
                }
            }
            (GroupElement::So3 { rot: r1 }, GroupElement::So3 { rot: r2 }) => {
                GroupElement::So3 { rot: r1 * r2 }
            }
            (GroupElement::Rn(a), GroupElement::Rn(b)) => GroupElement::Rn(a + b),
            _ => unreachable!(),
        })
    }

    /// Group inverse (uses the transpose for the rotation block).
    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Se3 { rot, trans } => {
                let rt = rot.transpose();
                GroupElement::Se3 {
                    trans: -(rt * trans),
                    rot: rt,
                }
            }
            GroupElement::So3 { rot } => GroupElement::So3 {
                rot: rot.transpose(),
            },
            GroupElement::Rn(v) => GroupElement::Rn(-v),
        }
    }

    /// `self^{-1} * other`.
    pub fn between(&self, other: &GroupElement) -> Result<GroupElement> {
        self.inverse().compose(other)
    }

    pub fn rotation(&self) -> Option<&Matrix3<f64>> {
        match self {
            GroupElement::Se3 { rot, .. } | GroupElement::So3 { rot } => Some(rot),
            GroupElement::Rn(_) => None,
        }
    }

    pub fn translation_part(&self) -> Option<&Vector3<f64>> {
        match self {
            GroupElement::Se3 { trans, .. } => Some(trans),
            _ => None,
        }
    }

    /// Homogeneous matrix representation.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.kind().matrix_dim();
        let mut m = DMatrix::identity(d, d);
        match self {
            GroupElement::Se3 { rot, trans } => {
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(rot);
                m.fixed_view_mut::<3, 1>(0, 3).copy_from(trans);
            }
            GroupElement::So3 { rot } => m.copy_from(rot),
            GroupElement::Rn(v) => {
                let n = v.len();
                for i in 0..n {
                    m[(i, n)] = v[i];
                }
            }
        }
        m
    }

    /// Adjoint action matrix: `Ad_g x = vee(g hat(x) g^{-1})`.
    pub fn adjoint(&self) -> DMatrix<f64> {
        match self {
            GroupElement::Se3 { rot, trans } => {
                let mut m = DMatrix::zeros(6, 6);
                m.fixed_view_mut::<3, 3>(0, 0).copy_from(rot);
                m.fixed_view_mut::<3, 3>(3, 3).copy_from(rot);
                m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(trans) * rot));
                m
            }
            GroupElement::So3 { rot } => DMatrix::from_fn(3, 3, |i, j| rot[(i, j)]),
            GroupElement::Rn(v) => DMatrix::identity(v.len(), v.len()),
        }
    }

    /// Coadjoint action matrix `Ad*_g = (Ad_g)^T`.
    pub fn coadjoint(&self) -> DMatrix<f64> {
        self.adjoint().transpose()
    }

    pub fn ad(&self, x: &AlgebraVector) -> Result<AlgebraVector> {
        check_dim(self.kind().algebra_dim(), x.dim())?;
        Ok(AlgebraVector(self.adjoint() * &x.0))
    }

    pub fn ad_star(&self, m: &CoAlgebraVector) -> Result<CoAlgebraVector> {
        check_dim(self.kind().algebra_dim(), m.dim())?;
        Ok(CoAlgebraVector(self.coadjoint() * &m.0))
    }

    /// Distance of the rotation block from SO(3), `||R^T R - I||_max`.
    /// Zero for R^n.
    pub fn orthogonality_defect(&self) -> f64 {
        match self.rotation() {
            Some(r) => (r.transpose() * r - Matrix3::identity()).amax(),
            None => 0.0,
        }
    }

    /// Rejects elements whose rotation block drifted from SO(3) by more than
    /// `tol` or has negative determinant. Never re-orthonormalizes.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if let Some(r) = self.rotation() {
            let defect = self.orthogonality_defect().max((r.determinant() - 1.0).abs());
            if !(defect <= tol) {
                return Err(Error::InvalidElement { defect });
            }
        }
        Ok(())
    }

    /// Max-norm distance between homogeneous matrices.
    pub fn distance(&self, other: &GroupElement) -> Result<f64> {
        self.same_kind(other)?;
        Ok((self.matrix() - other.matrix()).amax())
    }

    pub fn is_finite(&self) -> bool {
        self.matrix().iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rx(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
    }

    #[test]
    fn compose_rotation_then_translation() {
        let g = GroupElement::se3(rx(std::f64::consts::FRAC_PI_2), Vector3::zeros());
        let h = GroupElement::translation(Vector3::new(0.0, 0.0, 1.0));
        let gh = g.compose(&h).unwrap();
        let t = gh.translation_part().unwrap();
        assert!((t - Vector3::new(0.0, -1.0, 0.0)).amax() < 1e-15, "{t}");
        assert!((gh.rotation().unwrap() - rx(std::f64::consts::FRAC_PI_2)).amax() < 1e-15);
    }

    #[test]
    fn hat_of_first_basis_vector() {
        let m = GroupKind::Se3.hat(&AlgebraVector::basis(6, 0)).unwrap();
        let expected = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        let block: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
        assert_eq!(block, expected);
        assert_eq!(m.column(3).amax(), 0.0);
    }

    #[test]
    fn vee_rejects_non_algebra_matrix() {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = 1.0;
        assert!(matches!(
            GroupKind::Se3.vee(&m, 1e-12),
            Err(Error::NotInAlgebra { .. })
        ));
    }

    #[test]
    fn variant_mismatch_is_reported() {
        let g = GroupElement::identity(GroupKind::Se3);
        let h = GroupElement::identity(GroupKind::So3);
        assert!(matches!(g.compose(&h), Err(Error::VariantMismatch { .. })));
    }

    #[test]
    fn validate_reports_drift() {
        let mut r = Matrix3::identity();
        r[(0, 0)] = 1.0 + 1e-6;
        let g = GroupElement::se3(r, Vector3::zeros());
        assert!(g.validate(1e-9).is_err());
        assert!(g.validate(1e-5).is_ok());
    }
}
