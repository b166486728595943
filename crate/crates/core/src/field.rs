//! Group-valued fields on the node grid and per-triangle jets.
//!
//! Nodes are indexed `(j, a)` with `j = 0..=N` (time) and `a = 0..=A`
//! (space). Triangle `(j, a)` has vertices `(j, a)`, `(j+1, a)`, `(j, a+1)`
//! and exists for `j < N`, `a < A`.

use crate::error::{Error, Result};
use crate::group::{AlgebraVector, GroupElement, GroupKind};
use crate::retraction::Retraction;

/// Grid sizes and steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Number of time cells N.
    pub n_time: usize,
    /// Number of space cells A.
    pub n_space: usize,
    pub dt: f64,
    pub ds: f64,
}

impl GridSpec {
    pub fn new(n_time: usize, n_space: usize, dt: f64, ds: f64) -> Result<Self> {
        if n_time < 2 || n_space < 2 {
            return Err(Error::DegenerateGrid { n_time, n_space });
        }
        for (name, v) in [("dt", dt), ("ds", ds)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and positive, got {v}"),
                });
            }
        }
        Ok(GridSpec {
            n_time,
            n_space,
            dt,
            ds,
        })
    }

    /// Grid covering `[0, duration] x [0, length]`; the step sizes must
    /// divide the extents (up to rounding).
    pub fn from_extent(duration: f64, length: f64, dt: f64, ds: f64) -> Result<Self> {
        Self::new(
            Self::step_count("dt", duration, dt)?,
            Self::step_count("ds", length, ds)?,
            dt,
            ds,
        )
    }

    /// `round(extent / step)`, rejected unless it reproduces the extent
    /// within 1e-9 relative.
    pub fn step_count(name: &'static str, extent: f64, step: f64) -> Result<usize> {
        let n = (extent / step).round();
        if !(n >= 1.0) || ((n * step - extent).abs() > 1e-9 * extent.abs().max(1.0)) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("step {step} does not divide extent {extent}"),
            });
        }
        Ok(n as usize)
    }

    pub fn node_count(&self) -> usize {
        (self.n_time + 1) * (self.n_space + 1)
    }

    pub fn is_triangle(&self, j: usize, a: usize) -> bool {
        j < self.n_time && a < self.n_space
    }

    pub fn is_boundary_node(&self, j: usize, a: usize) -> bool {
        j == 0 || a == 0 || j == self.n_time || a == self.n_space
    }
}

/// Values of a group-valued field at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    grid: GridSpec,
    kind: GroupKind,
    nodes: Vec<GroupElement>,
}

impl DiscreteField {
    pub fn filled(grid: GridSpec, value: GroupElement) -> Self {
        DiscreteField {
            kind: value.kind(),
            nodes: vec![value; grid.node_count()],
            grid,
        }
    }

    pub fn from_fn(
        grid: GridSpec,
        kind: GroupKind,
        mut f: impl FnMut(usize, usize) -> GroupElement,
    ) -> Result<Self> {
        let mut nodes = Vec::with_capacity(grid.node_count());
        for j in 0..=grid.n_time {
            for a in 0..=grid.n_space {
                let g = f(j, a);
                if g.kind() != kind {
                    return Err(Error::VariantMismatch {
                        expected: kind,
                        found: g.kind(),
                    });
                }
                nodes.push(g);
            }
        }
        Ok(DiscreteField { grid, kind, nodes })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    fn index(&self, j: usize, a: usize) -> Result<usize> {
        if j > self.grid.n_time {
            return Err(Error::IndexOutOfRange {
                what: "time node",
                index: j,
                limit: self.grid.n_time,
            });
        }
        if a > self.grid.n_space {
            return Err(Error::IndexOutOfRange {
                what: "space node",
                index: a,
                limit: self.grid.n_space,
            });
        }
        Ok(j * (self.grid.n_space + 1) + a)
    }

    pub fn get(&self, j: usize, a: usize) -> Result<&GroupElement> {
        Ok(&self.nodes[self.index(j, a)?])
    }

    /// Unchecked access used in hot loops; panics when out of range.
    pub fn at(&self, j: usize, a: usize) -> &GroupElement {
        &self.nodes[j * (self.grid.n_space + 1) + a]
    }

    pub fn set(&mut self, j: usize, a: usize, g: GroupElement) -> Result<()> {
        if g.kind() != self.kind {
            return Err(Error::VariantMismatch {
                expected: self.kind,
                found: g.kind(),
            });
        }
        let i = self.index(j, a)?;
        self.nodes[i] = g;
        Ok(())
    }

    pub fn time_slice(&self, j: usize) -> Result<Vec<GroupElement>> {
        (0..=self.grid.n_space)
            .map(|a| self.get(j, a).cloned())
            .collect()
    }

    pub fn space_slice(&self, a: usize) -> Result<Vec<GroupElement>> {
        (0..=self.grid.n_time)
            .map(|j| self.get(j, a).cloned())
            .collect()
    }

    pub fn set_time_slice(&mut self, j: usize, values: &[GroupElement]) -> Result<()> {
        check_len(values.len(), self.grid.n_space + 1)?;
        for (a, g) in values.iter().enumerate() {
            self.set(j, a, g.clone())?;
        }
        Ok(())
    }

    pub fn set_space_slice(&mut self, a: usize, values: &[GroupElement]) -> Result<()> {
        check_len(values.len(), self.grid.n_time + 1)?;
        for (j, g) in values.iter().enumerate() {
            self.set(j, a, g.clone())?;
        }
        Ok(())
    }

    /// Left translation of every node by `h`.
    pub fn left_translate(&self, h: &GroupElement) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .map(|g| h.compose(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiscreteField {
            grid: self.grid,
            kind: self.kind,
            nodes,
        })
    }

    /// Largest node-wise distance between two fields.
    pub fn distance(&self, other: &DiscreteField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "fields live on different grids".into(),
            });
        }
        let mut d: f64 = 0.0;
        for (g, h) in self.nodes.iter().zip(&other.nodes) {
            d = d.max(g.distance(h)?);
        }
        Ok(d)
    }

    /// Largest orthogonality defect over all nodes.
    pub fn max_orthogonality_defect(&self) -> f64 {
        self.nodes
            .iter()
            .map(|g| g.orthogonality_defect())
            .fold(0.0, f64::max)
    }

    /// Jet of triangle `(j, a)`.
    pub fn jet(&self, ret: &Retraction, j: usize, a: usize) -> Result<Jet> {
        if !self.grid.is_triangle(j, a) {
            return Err(Error::IndexOutOfRange {
                what: "triangle",
                index: j * (self.grid.n_space + 1) + a,
                limit: self.grid.n_time * self.grid.n_space,
            });
        }
        Jet::from_vertices(
            ret,
            self.grid.dt,
            self.grid.ds,
            self.at(j, a),
            self.at(j + 1, a),
            self.at(j, a + 1),
        )
        .map_err(|e| Error::TriangleDomain {
            j,
            a,
            source: Box::new(e),
        })
    }
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Base point and discrete derivatives of a field on one triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub g: GroupElement,
    pub xi: AlgebraVector,
    pub eta: AlgebraVector,
    /// `g^{-1} g_time`, equal to `tau(dt xi)`.
    pub step_time: GroupElement,
    /// `g^{-1} g_space`, equal to `tau(ds eta)`.
    pub step_space: GroupElement,
}

impl Jet {
    pub fn from_vertices(
        ret: &Retraction,
        dt: f64,
        ds: f64,
        g: &GroupElement,
        g_time: &GroupElement,
        g_space: &GroupElement,
    ) -> Result<Jet> {
        let step_time = g.between(g_time)?;
        let step_space = g.between(g_space)?;
        let xi = ret.tau_inv(&step_time)? * (1.0 / dt);
        let eta = ret.tau_inv(&step_space)? * (1.0 / ds);
        Ok(Jet {
            g: g.clone(),
            xi,
            eta,
            step_time,
            step_space,
        })
    }

    /// Jet from a base point and algebra data; the vertices follow by
    /// applying the retraction.
    pub fn from_algebra(
        ret: &Retraction,
        dt: f64,
        ds: f64,
        g: GroupElement,
        xi: AlgebraVector,
        eta: AlgebraVector,
    ) -> Result<Jet> {
        let step_time = ret.tau(&(&xi * dt))?;
        let step_space = ret.tau(&(&eta * ds))?;
        Ok(Jet {
            g,
            xi,
            eta,
            step_time,
            step_space,
        })
    }

    /// The three vertices `(g, g tau(dt xi), g tau(ds eta))`.
    pub fn vertices(&self) -> Result<[GroupElement; 3]> {
        Ok([
            self.g.clone(),
            self.g.compose(&self.step_time)?,
            self.g.compose(&self.step_space)?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(matches!(
            GridSpec::new(1, 5, 0.1, 0.1),
            Err(Error::DegenerateGrid { .. })
        ));
        assert!(GridSpec::new(2, 2, 0.1, 0.1).is_ok());
    }

    #[test]
    fn extent_grid_counts_cells() {
        let g = GridSpec::from_extent(2.0, 0.8, 0.04, 0.02).unwrap();
        assert_eq!((g.n_time, g.n_space), (50, 40));
        assert!(GridSpec::from_extent(1.0, 1.0, 0.3, 0.1).is_err());
    }

    #[test]
    fn set_rejects_wrong_variant() {
        let grid = GridSpec::new(2, 2, 0.1, 0.1).unwrap();
        let mut f = DiscreteField::filled(grid, GroupElement::identity(GroupKind::Se3));
        assert!(f.set(0, 0, GroupElement::identity(GroupKind::So3)).is_err());
        assert!(f.set(3, 0, GroupElement::identity(GroupKind::Se3)).is_err());
    }
}
