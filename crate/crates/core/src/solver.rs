//! Newton iteration for one slice of unknown nodes.
//!
//! A slice system lists unknown nodes and equation nodes in matching order
//! such that equation `r` only depends on unknowns `r-1, r, r+1`. The
//! Jacobian is then block tridiagonal; it is assembled by finite
//! differences with a three-colouring of the unknowns and solved with block
//! elimination (dense LU fallback).

use nalgebra::{DMatrix, DVector};

use crate::dcel::Discretization;
use crate::error::{Error, Result};
use crate::field::DiscreteField;
use crate::group::AlgebraVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    ForwardDifference,
    CentralDifference,
    /// Five-point central stencil, error O(h^4).
    FourthOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Absolute tolerance on the max-norm of the residual.
    pub tolerance: f64,
    /// A full Newton step whose max-norm (algebra coordinates) falls below
    /// this also counts as converged. Catches the roundoff floor of stiff
    /// models, where the residual cannot reach `tolerance`.
    pub step_tolerance: f64,
    pub max_iterations: usize,
    pub jacobian: JacobianMode,
    /// Finite-difference step in algebra coordinates.
    pub fd_step: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-12,
            step_tolerance: 1e-11,
            max_iterations: 50,
            jacobian: JacobianMode::ForwardDifference,
            fd_step: 1e-7,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: format!("must be positive, got {}", self.tolerance),
            });
        }
        if !(self.step_tolerance >= 0.0 && self.step_tolerance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "step_tolerance",
                reason: format!("must be non-negative, got {}", self.step_tolerance),
            });
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1.0) {
            return Err(Error::InvalidParameter {
                name: "fd_step",
                reason: format!("must lie in (0, 1), got {}", self.fd_step),
            });
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Unknown and equation nodes of one slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSystem {
    /// Index of the slice being solved for (for error reports).
    pub slice: usize,
    pub unknowns: Vec<(usize, usize)>,
    pub equations: Vec<(usize, usize)>,
}

/// Outcome of one Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub slice: usize,
    pub iterations: usize,
    pub residual: f64,
    /// Max-norm of the last Newton step taken (0 when none was needed).
    pub step: f64,
    /// Residual max-norm before each iteration and after the last one.
    pub trace: Vec<f64>,
}

impl SolveReport {
    /// Whether the solve meets either convergence test of `settings`.
    pub fn converged(&self, settings: &SolverSettings) -> bool {
        self.residual <= settings.tolerance || (self.iterations > 0 && self.step <= settings.step_tolerance)
    }
}

/// Left-trivialized tangent vectors at every node of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    n_space: usize,
    values: Vec<AlgebraVector>,
}

impl TangentField {
    pub fn zeros(field: &DiscreteField) -> Self {
        let grid = field.grid();
        TangentField {
            n_space: grid.n_space,
            values: vec![AlgebraVector::zeros(field.kind().algebra_dim()); grid.node_count()],
        }
    }

    pub fn get(&self, j: usize, a: usize) -> &AlgebraVector {
        &self.values[j * (self.n_space + 1) + a]
    }

    pub fn set(&mut self, j: usize, a: usize, v: AlgebraVector) {
        self.values[j * (self.n_space + 1) + a] = v;
    }

    /// Largest entry over all nodes.
    pub fn amax(&self) -> f64 {
        self.values.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// Field obtained by moving every node along `scale * tangent`.
    pub fn displace(&self, disc: &Discretization, field: &DiscreteField, scale: f64) -> Result<DiscreteField> {
        let grid = *field.grid();
        let mut out = field.clone();
        for j in 0..=grid.n_time {
            for a in 0..=grid.n_space {
                let v = self.get(j, a);
                if v.amax() == 0.0 {
                    continue;
                }
                let g = field.at(j, a).compose(&disc.ret.tau(&(v * scale))?)?;
                out.set(j, a, g)?;
            }
        }
        Ok(out)
    }
}

/// Block tridiagonal matrix with square blocks of equal size.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub lower: Vec<DMatrix<f64>>,
    pub diag: Vec<DMatrix<f64>>,
    pub upper: Vec<DMatrix<f64>>,
}

impl BlockTridiagonal {
    fn zeros(n: usize, b: usize) -> Self {
        BlockTridiagonal {
            lower: vec![DMatrix::zeros(b, b); n],
            diag: vec![DMatrix::zeros(b, b); n],
            upper: vec![DMatrix::zeros(b, b); n],
        }
    }

    fn block_mut(&mut self, row: usize, col: usize) -> &mut DMatrix<f64> {
        if col + 1 == row {
            &mut self.lower[row]
        } else if col == row {
            &mut self.diag[row]
        } else {
            &mut self.upper[row]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let b = self.diag.first().map_or(0, |m| m.nrows());
        let mut m = DMatrix::zeros(n * b, n * b);
        for i in 0..n {
            m.view_mut((i * b, i * b), (b, b)).copy_from(&self.diag[i]);
            if i > 0 {
                m.view_mut((i * b, (i - 1) * b), (b, b)).copy_from(&self.lower[i]);
            }
            if i + 1 < n {
                m.view_mut((i * b, (i + 1) * b), (b, b)).copy_from(&self.upper[i]);
            }
        }
        m
    }

    fn solve_blocks(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.diag.len();
        let b = self.diag[0].nrows();
        let mut d: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        let mut y: Vec<DVector<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let bi = rhs.rows(i * b, b).into_owned();
            if i == 0 {
                d.push(self.diag[0].clone());
                y.push(bi);
                continue;
            }
            // m = L_i D'_{i-1}^{-1}
            let m = d[i - 1]
                .transpose()
                .lu()
                .solve(&self.lower[i].transpose())?
                .transpose();
            d.push(&self.diag[i] - &m * &self.upper[i - 1]);
            y.push(bi - &m * &y[i - 1]);
        }
        let mut x = vec![DVector::zeros(b); n];
        for i in (0..n).rev() {
            let mut r = y[i].clone();
            if i + 1 < n {
                r -= &self.upper[i] * &x[i + 1];
            }
            x[i] = d[i].clone().lu().solve(&r)?;
        }
        let out = DVector::from_iterator(n * b, x.iter().flat_map(|v| v.iter().copied()));
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    /// Solves `M x = rhs`; falls back to a dense LU when block elimination
    /// meets a singular pivot block.
    pub fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        if let Some(x) = self.solve_blocks(rhs) {
            let resid = self.to_dense() * &x - rhs;
            if resid.amax() <= 1e-8 * rhs.amax().max(f64::MIN_POSITIVE) {
                return Some(x);
            }
        }
        self.to_dense().lu().solve(rhs)
    }
}

/// Stacked residuals of the equation nodes.
pub fn residual_vector(disc: &Discretization, field: &DiscreteField, sys: &SliceSystem) -> Result<DVector<f64>> {
    let n = field.kind().algebra_dim();
    let mut out = DVector::zeros(n * sys.equations.len());
    for (r, &(j, a)) in sys.equations.iter().enumerate() {
        let res = disc.nodal_residual(field, j, a)?;
        out.rows_mut(r * n, n).copy_from(&res.0);
    }
    Ok(out)
}

fn perturb(
    disc: &Discretization,
    field: &mut DiscreteField,
    base: &[crate::group::GroupElement],
    sys: &SliceSystem,
    color: usize,
    dir: usize,
    step: f64,
) -> Result<()> {
    let n = field.kind().algebra_dim();
    let delta = disc.ret.tau(&(AlgebraVector::basis(n, dir) * step))?;
    for (k, &(j, a)) in sys.unknowns.iter().enumerate() {
        if k % 3 == color {
            field.set(j, a, base[k].compose(&delta)?)?;
        }
    }
    Ok(())
}

/// Finite-difference Jacobian of the equations with respect to the unknowns
/// (coordinates `g -> g tau(u)`).
pub fn slice_jacobian(
    disc: &Discretization,
    field: &DiscreteField,
    sys: &SliceSystem,
    mode: JacobianMode,
    step: f64,
) -> Result<BlockTridiagonal> {
    let n = field.kind().algebra_dim();
    let m = sys.unknowns.len();
    if sys.equations.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: sys.equations.len(),
        });
    }
    let base: Vec<_> = sys
        .unknowns
        .iter()
        .map(|&(j, a)| field.get(j, a).cloned())
        .collect::<Result<_>>()?;
    let r0 = match mode {
        JacobianMode::ForwardDifference => Some(residual_vector(disc, field, sys)?),
        JacobianMode::CentralDifference | JacobianMode::FourthOrder => None,
    };
    let mut work = field.clone();
    let mut jac = BlockTridiagonal::zeros(m, n);
    for color in 0..3.min(m) {
        for dir in 0..n {
            perturb(disc, &mut work, &base, sys, color, dir, step)?;
            let rp = residual_vector(disc, &work, sys)?;
            let diff = match (&r0, mode) {
                (Some(r0), _) => (rp - r0) / step,
                (None, JacobianMode::FourthOrder) => {
                    perturb(disc, &mut work, &base, sys, color, dir, -step)?;
                    let rm = residual_vector(disc, &work, sys)?;
                    perturb(disc, &mut work, &base, sys, color, dir, 2.0 * step)?;
                    let rpp = residual_vector(disc, &work, sys)?;
                    perturb(disc, &mut work, &base, sys, color, dir, -2.0 * step)?;
                    let rmm = residual_vector(disc, &work, sys)?;
                    ((rp - rm) * 8.0 - (rpp - rmm)) / (12.0 * step)
                }
                (None, _) => {
                    perturb(disc, &mut work, &base, sys, color, dir, -step)?;
                    let rm = residual_vector(disc, &work, sys)?;
                    (rp - rm) / (2.0 * step)
                }
            };
            for (k, &(j, a)) in sys.unknowns.iter().enumerate() {
                if k % 3 == color {
                    work.set(j, a, base[k].clone())?;
                }
            }
            for row in 0..m {
                let lo = row.saturating_sub(1);
                let hi = (row + 1).min(m - 1);
                for col in lo..=hi {
                    if col % 3 == color {
                        let block = jac.block_mut(row, col);
                        block.column_mut(dir).copy_from(&diff.rows(row * n, n));
                    }
                }
            }
        }
    }
    Ok(jac)
}

fn apply_update(
    disc: &Discretization,
    field: &mut DiscreteField,
    base: &[crate::group::GroupElement],
    sys: &SliceSystem,
    delta: &DVector<f64>,
    scale: f64,
) -> Result<()> {
    let n = field.kind().algebra_dim();
    for (k, &(j, a)) in sys.unknowns.iter().enumerate() {
        let d = AlgebraVector(delta.rows(k * n, n).into_owned() * scale);
        field.set(j, a, base[k].compose(&disc.ret.tau(&d)?)?)?;
    }
    Ok(())
}

/// Newton iteration with backtracking on the unknown nodes of `sys`. The
/// current values of the unknowns are the initial guess.
pub fn newton_solve(
    disc: &Discretization,
    field: &mut DiscreteField,
    sys: &SliceSystem,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    let mut trace = Vec::new();
    let mut resid = residual_vector(disc, field, sys)?;
    let mut norm = resid.amax();
    let mut small_step = false;
    let mut last_step = 0.0;
    let fail = |trace: Vec<f64>, iterations| Error::NewtonDivergence {
        slice: sys.slice,
        iterations,
        trace,
    };
    for iter in 0..=settings.max_iterations {
        if !norm.is_finite() {
            trace.push(norm);
            return Err(fail(trace, iter));
        }
        trace.push(norm);
        if norm <= settings.tolerance || small_step {
            return Ok(SolveReport {
                slice: sys.slice,
                iterations: iter,
                residual: norm,
                step: last_step,
                trace,
            });
        }
        if iter == settings.max_iterations {
            break;
        }
        let jac = slice_jacobian(disc, field, sys, settings.jacobian, settings.fd_step)?;
        let delta = jac
            .solve(&(-&resid))
            .ok_or(Error::SingularJacobian { slice: sys.slice })?;
        last_step = delta.amax();
        let base: Vec<_> = sys
            .unknowns
            .iter()
            .map(|&(j, a)| field.at(j, a).clone())
            .collect();
        if delta.amax() <= settings.step_tolerance {
            apply_update(disc, field, &base, sys, &delta, 1.0)?;
            resid = residual_vector(disc, field, sys)?;
            norm = resid.amax();
            small_step = true;
            continue;
        }
        let mut scale = 1.0;
        loop {
            let trial = apply_update(disc, field, &base, sys, &delta, scale)
                .and_then(|_| residual_vector(disc, field, sys));
            match trial {
                Ok(r) if r.amax() < norm || scale < 1.0 / 512.0 => {
                    last_step *= scale;
                    resid = r;
                    norm = resid.amax();
                    break;
                }
                Err(e) if scale < 1.0 / 512.0 => return Err(e),
                _ => scale *= 0.5,
            }
        }
    }
    Err(fail(trace, settings.max_iterations))
}

/// First variation of the unknown nodes: solves the linearized equations
/// for the tangent at the unknowns given the tangent at every other node.
/// Uses central differences with step `step` for all derivatives.
pub fn linearized_solve(
    disc: &Discretization,
    field: &DiscreteField,
    sys: &SliceSystem,
    tangent: &mut TangentField,
    step: f64,
) -> Result<()> {
    let n = field.kind().algebra_dim();
    let mut known = tangent.clone();
    for &(j, a) in &sys.unknowns {
        known.set(j, a, AlgebraVector::zeros(n));
    }
    // Known data enter the equations only through nodes next to the
    // unknowns; keep the difference step inside the chart there.
    let grid = *field.grid();
    let mut size: f64 = 0.0;
    for &(j, a) in &sys.unknowns {
        for jj in j.saturating_sub(1)..=(j + 1).min(grid.n_time) {
            for aa in a.saturating_sub(1)..=(a + 1).min(grid.n_space) {
                size = size.max(known.get(jj, aa).amax());
            }
        }
    }
    let h = step / size.max(1.0);
    let r = |scale: f64| residual_vector(disc, &known.displace(disc, field, scale)?, sys);
    let rhs = -((r(h)? - r(-h)?) * 8.0 - (r(2.0 * h)? - r(-2.0 * h)?)) / (12.0 * h);
    let jac = slice_jacobian(disc, field, sys, JacobianMode::FourthOrder, step)?;
    let x = jac.solve(&rhs).ok_or(Error::SingularJacobian { slice: sys.slice })?;
    for (k, &(j, a)) in sys.unknowns.iter().enumerate() {
        tangent.set(j, a, AlgebraVector(x.rows(k * n, n).into_owned()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_solver_matches_dense() {
        let n = 4;
        let b = 3;
        let mut m = BlockTridiagonal::zeros(n, b);
        let mut seed = 1.0_f64;
        let mut next = || {
            seed = (seed * 16807.0) % 2147483647.0;
            seed / 2147483647.0 - 0.5
        };
        for i in 0..n {
            for r in 0..b {
                for c in 0..b {
                    m.diag[i][(r, c)] = next() + if r == c { 4.0 } else { 0.0 };
                    m.lower[i][(r, c)] = if i > 0 { next() } else { 0.0 };
                    m.upper[i][(r, c)] = if i + 1 < n { next() } else { 0.0 };
                }
            }
        }
        let rhs = DVector::from_fn(n * b, |i, _| i as f64 - 2.0);
        let x = m.solve_blocks(&rhs).unwrap();
        let y = m.to_dense().lu().solve(&rhs).unwrap();
        assert!((x - y).amax() < 1e-12);
    }
}
