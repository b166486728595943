//! Multisymplectic variational integrators for Lie group valued fields on
//! triangulated space-time grids.
//!
//! The crate provides the group kernel (SE(3), SO(3), R^n), Cayley and
//! exponential retractions, discrete Lagrangian densities (geometrically
//! exact beam, scalar wave), the discrete covariant Euler-Lagrange engine
//! with time and space marching, and diagnostics for discrete momentum
//! maps, energies and (multi)symplecticity.

pub mod conservation;
pub mod dcel;
pub mod error;
pub mod field;
pub mod forms;
pub mod group;
pub mod model;
pub mod retraction;
pub mod scenario;
pub mod solver;
pub mod stepper;

pub use dcel::{BoundaryRegime, Discretization, DiscreteForces};
pub use error::{Error, Result};
pub use field::{DiscreteField, GridSpec, Jet};
pub use group::{AlgebraVector, CoAlgebraVector, GroupElement, GroupKind};
pub use model::{BeamModel, BeamParameters, DensityModel, ScalarWaveModel, Symmetry};
pub use retraction::{Retraction, RetractionKind};
pub use solver::{JacobianMode, SolveReport, SolverSettings, TangentField};
pub use stepper::Stepper;
