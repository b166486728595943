//! Time and space marching of the discrete covariant Euler-Lagrange
//! equations.
//!
//! Time step `j`: given slices `j-1` and `j`, solve for slice `j+1` from the
//! equations at the nodes of slice `j`. Space step `a`: given slices `a-1`
//! and `a`, solve for slice `a+1` from the equations at the nodes of slice
//! `a`. Prescribed nodes are read from the field and never modified.
//!
//! Natural boundary conditions that only involve the new slice are imposed
//! on it: the far-end traction `(j+1, A)` in time marching under
//! `TimeOnly`, and the terminal zero momentum `(N, a+1)` in space marching
//! under `SpaceOnly`/`SpaceEvolutionBvp`. The corner node `(N, A)` belongs
//! to no triangle; when it is an unknown it is set by constant-rate
//! extrapolation.

use crate::dcel::{BoundaryRegime, Discretization};
use crate::error::{Error, Result};
use crate::field::DiscreteField;
use crate::group::{AlgebraVector, GroupElement};
use crate::solver::{linearized_solve, newton_solve, SliceSystem, SolveReport, SolverSettings, TangentField};

#[derive(Clone, Copy)]
pub struct Stepper<'a> {
    pub disc: Discretization<'a>,
    pub regime: BoundaryRegime,
    pub settings: SolverSettings,
}

impl<'a> Stepper<'a> {
    pub fn new(disc: Discretization<'a>, regime: BoundaryRegime, settings: SolverSettings) -> Result<Self> {
        settings.validate()?;
        Ok(Stepper {
            disc,
            regime,
            settings,
        })
    }

    /// Equations and unknowns for the time step from slice `j` to `j+1`.
    pub fn time_system(&self, field: &DiscreteField, j: usize) -> Result<SliceSystem> {
        let grid = field.grid();
        let (n, m) = (grid.n_time, grid.n_space);
        if j == 0 || j >= n {
            return Err(Error::IndexOutOfRange {
                what: "time step",
                index: j,
                limit: n - 1,
            });
        }
        let (unknowns, equations) = match self.regime {
            BoundaryRegime::SpaceTime | BoundaryRegime::SpaceOnly => (
                (1..m).map(|a| (j + 1, a)).collect(),
                (1..m).map(|a| (j, a)).collect(),
            ),
            BoundaryRegime::TimeOnly => {
                let mut eqs: Vec<_> = (0..m).map(|a| (j, a)).collect();
                let last = if j + 1 < n {
                    eqs.push((j + 1, m));
                    m
                } else {
                    m - 1
                };
                ((0..=last).map(|a| (j + 1, a)).collect(), eqs)
            }
            BoundaryRegime::SpaceEvolutionBvp => {
                return Err(Error::RegimeMismatch(
                    "time stepping is not defined for the space-evolution problem".into(),
                ))
            }
        };
        Ok(SliceSystem {
            slice: j + 1,
            unknowns,
            equations,
        })
    }

    /// Equations and unknowns for the space step from slice `a` to `a+1`.
    pub fn space_system(&self, field: &DiscreteField, a: usize) -> Result<SliceSystem> {
        let grid = field.grid();
        let (n, m) = (grid.n_time, grid.n_space);
        if a == 0 || a >= m {
            return Err(Error::IndexOutOfRange {
                what: "space step",
                index: a,
                limit: m - 1,
            });
        }
        let (unknowns, equations) = match self.regime {
            BoundaryRegime::SpaceTime | BoundaryRegime::TimeOnly => (
                (1..n).map(|j| (j, a + 1)).collect(),
                (1..n).map(|j| (j, a)).collect(),
            ),
            BoundaryRegime::SpaceOnly | BoundaryRegime::SpaceEvolutionBvp => {
                let mut eqs: Vec<_> = (0..n).map(|j| (j, a)).collect();
                let last = if a + 1 < m {
                    eqs.push((n, a + 1));
                    n
                } else {
                    n - 1
                };
                ((0..=last).map(|j| (j, a + 1)).collect(), eqs)
            }
        };
        Ok(SliceSystem {
            slice: a + 1,
            unknowns,
            equations,
        })
    }

    /// `g1 tau(tau^{-1}(g0^{-1} g1))`: constant-rate extrapolation. Passing
    /// the increment through the retraction keeps it on the group, so
    /// roundoff drift off SO(3) is not compounded from slice to slice.
    fn extrapolate(&self, g0: &GroupElement, g1: &GroupElement) -> Result<GroupElement> {
        let ret = self.disc.ret;
        g1.compose(&ret.tau(&ret.tau_inv(&g0.between(g1)?)?)?)
    }

    /// Solves for slice `j+1`; the field must hold valid slices `j-1`, `j`
    /// and any prescribed nodes of slice `j+1`.
    pub fn step_time(&self, field: &mut DiscreteField, j: usize) -> Result<SolveReport> {
        self.disc.check_field(field)?;
        let sys = self.time_system(field, j)?;
        let m = field.grid().n_space;
        let n = field.grid().n_time;
        for a in 0..=m {
            let is_unknown = sys.unknowns.contains(&(j + 1, a));
            let orphan = j + 1 == n && a == m && self.regime == BoundaryRegime::TimeOnly;
            if is_unknown || orphan {
                let g = self.extrapolate(field.at(j - 1, a), field.at(j, a))?;
                field.set(j + 1, a, g)?;
            }
        }
        newton_solve(&self.disc, field, &sys, &self.settings)
    }

    /// Solves for slice `a+1`; the field must hold valid slices `a-1`, `a`
    /// and any prescribed nodes of slice `a+1`.
    pub fn step_space(&self, field: &mut DiscreteField, a: usize) -> Result<SolveReport> {
        self.disc.check_field(field)?;
        let sys = self.space_system(field, a)?;
        let n = field.grid().n_time;
        let m = field.grid().n_space;
        let natural = matches!(
            self.regime,
            BoundaryRegime::SpaceOnly | BoundaryRegime::SpaceEvolutionBvp
        );
        for j in 0..=n {
            let is_unknown = sys.unknowns.contains(&(j, a + 1));
            let orphan = natural && j == n && a + 1 == m;
            if is_unknown || orphan {
                let g = self.extrapolate(field.at(j, a - 1), field.at(j, a))?;
                field.set(j, a + 1, g)?;
            }
        }
        newton_solve(&self.disc, field, &sys, &self.settings)
    }

    /// System fixing node `(N, a)` from the terminal zero-momentum condition.
    pub fn terminal_system(&self, field: &DiscreteField, a: usize) -> SliceSystem {
        let n = field.grid().n_time;
        SliceSystem {
            slice: a,
            unknowns: vec![(n, a)],
            equations: vec![(n, a)],
        }
    }

    /// Solves the terminal condition on slice `a` for node `(N, a)`.
    pub fn close_terminal(&self, field: &mut DiscreteField, a: usize) -> Result<SolveReport> {
        self.disc.check_field(field)?;
        let sys = self.terminal_system(field, a);
        newton_solve(&self.disc, field, &sys, &self.settings)
    }

    /// System fixing node `(j, A)` from the zero-traction condition.
    pub fn far_end_system(&self, field: &DiscreteField, j: usize) -> SliceSystem {
        let m = field.grid().n_space;
        SliceSystem {
            slice: j,
            unknowns: vec![(j, m)],
            equations: vec![(j, m)],
        }
    }

    /// Solves the zero-traction condition on slice `j` for node `(j, A)`.
    pub fn close_far_end(&self, field: &mut DiscreteField, j: usize) -> Result<SolveReport> {
        self.disc.check_field(field)?;
        let sys = self.far_end_system(field, j);
        newton_solve(&self.disc, field, &sys, &self.settings)
    }

    /// Marches in time from slice 1 up to slice N. Under `TimeOnly` the far
    /// end node of slice 1 is solved first.
    pub fn march_time(&self, field: &mut DiscreteField) -> Result<Vec<SolveReport>> {
        self.march_time_partial(field).into_result()
    }

    /// Like `march_time`, but keeps the reports of the completed steps when
    /// one fails.
    pub fn march_time_partial(&self, field: &mut DiscreteField) -> MarchOutcome {
        let n = field.grid().n_time;
        let mut out = MarchOutcome::default();
        if self.regime == BoundaryRegime::TimeOnly && !out.record(1, self.close_far_end(field, 1)) {
            return out;
        }
        for j in 1..n {
            if !out.record(j + 1, self.step_time(field, j)) {
                break;
            }
        }
        out
    }

    /// Marches in space from slice 1 up to slice A. Under
    /// `SpaceEvolutionBvp` the terminal node of slice 1 is solved first.
    pub fn march_space(&self, field: &mut DiscreteField) -> Result<Vec<SolveReport>> {
        self.march_space_partial(field).into_result()
    }

    /// Like `march_space`, but keeps the reports of the completed strips
    /// when one fails.
    pub fn march_space_partial(&self, field: &mut DiscreteField) -> MarchOutcome {
        let m = field.grid().n_space;
        let mut out = MarchOutcome::default();
        if self.regime == BoundaryRegime::SpaceEvolutionBvp && !out.record(1, self.close_terminal(field, 1)) {
            return out;
        }
        for a in 1..m {
            if !out.record(a + 1, self.step_space(field, a)) {
                break;
            }
        }
        out
    }

    /// Propagates a tangent field through the time steps (first variation).
    /// Slices 0 and 1 and the prescribed nodes of `tangent` are inputs;
    /// under `TimeOnly` the far end node of slice 1 is made consistent
    /// first.
    pub fn propagate_tangent_time(&self, field: &DiscreteField, tangent: &mut TangentField, step: f64) -> Result<()> {
        let n = field.grid().n_time;
        if self.regime == BoundaryRegime::TimeOnly {
            let sys = self.far_end_system(field, 1);
            linearized_solve(&self.disc, field, &sys, tangent, step)?;
        }
        for j in 1..n {
            let sys = self.time_system(field, j)?;
            linearized_solve(&self.disc, field, &sys, tangent, step)?;
        }
        Ok(())
    }

    /// Propagates a tangent field through the space steps. Slices 0 and 1
    /// are inputs; under the natural regimes the terminal node of slice 1
    /// is made consistent first.
    pub fn propagate_tangent_space(&self, field: &DiscreteField, tangent: &mut TangentField, step: f64) -> Result<()> {
        let m = field.grid().n_space;
        if matches!(
            self.regime,
            BoundaryRegime::SpaceOnly | BoundaryRegime::SpaceEvolutionBvp
        ) {
            let sys = self.terminal_system(field, 1);
            linearized_solve(&self.disc, field, &sys, tangent, step)?;
        }
        for a in 1..m {
            let sys = self.space_system(field, a)?;
            linearized_solve(&self.disc, field, &sys, tangent, step)?;
        }
        Ok(())
    }
}

/// Field for the space-evolution problem: slice 0 is `g0`, slice 1 is
/// `g0[j] tau(ds eta0[j])` for `j < N`; the remaining nodes are copies of
/// slice 0 until marched. `eta0` has N entries.
pub fn space_evolution_field(
    disc: &Discretization,
    grid: crate::field::GridSpec,
    g0: &[GroupElement],
    eta0: &[AlgebraVector],
) -> Result<DiscreteField> {
    if g0.len() != grid.n_time + 1 {
        return Err(Error::DimensionMismatch {
            expected: grid.n_time + 1,
            found: g0.len(),
        });
    }
    if eta0.len() != grid.n_time {
        return Err(Error::DimensionMismatch {
            expected: grid.n_time,
            found: eta0.len(),
        });
    }
    let kind = disc.model.group();
    let mut field = DiscreteField::from_fn(grid, kind, |j, _| g0[j].clone())?;
    for (j, eta) in eta0.iter().enumerate() {
        let g = g0[j].compose(&disc.ret.tau(&(eta * grid.ds))?)?;
        field.set(j, 1, g)?;
    }
    // Provisional value, replaced by the terminal solve.
    let n = grid.n_time;
    let step = disc.ret.tau(&disc.ret.tau_inv(&field.at(n - 1, 0).between(field.at(n, 0))?)?)?;
    let g = field.at(n - 1, 1).compose(&step)?;
    field.set(n, 1, g)?;
    Ok(field)
}

/// Reports of a march, and the slice whose solve failed if it stopped early.
#[derive(Debug, Default)]
pub struct MarchOutcome {
    pub reports: Vec<SolveReport>,
    /// Highest slice index whose solve succeeded (0 when none did).
    pub last_solved: usize,
    pub failure: Option<(usize, Error)>,
}

impl MarchOutcome {
    fn record(&mut self, slice: usize, r: Result<SolveReport>) -> bool {
        match r {
            Ok(rep) => {
                self.reports.push(rep);
                self.last_solved = self.last_solved.max(slice);
                true
            }
            Err(e) => {
                self.failure = Some((slice, e));
                false
            }
        }
    }

    pub fn max_iterations(&self) -> usize {
        self.reports.iter().map(|r| r.iterations).max().unwrap_or(0)
    }

    pub fn into_result(self) -> Result<Vec<SolveReport>> {
        match self.failure {
            Some((_, e)) => Err(e),
            None => Ok(self.reports),
        }
    }
}
