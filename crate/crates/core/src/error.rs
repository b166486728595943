use thiserror::Error;

use crate::group::GroupKind;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group variant mismatch: expected {expected:?}, found {found:?}")]
    VariantMismatch { expected: GroupKind, found: GroupKind },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not in the Lie algebra (structural defect {defect:e})")]
    NotInAlgebra { defect: f64 },

    #[error("group element is invalid (orthogonality defect {defect:e})")]
    InvalidElement { defect: f64 },

    #[error("argument outside the retraction domain (rotation angle {angle} exceeds bound {bound})")]
    RetractionDomain { angle: f64, bound: f64 },

    #[error("retraction domain violated on triangle (j={j}, a={a}): {source}")]
    TriangleDomain {
        j: usize,
        a: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid must have at least 2 cells in each direction (got N={n_time}, A={n_space})")]
    DegenerateGrid { n_time: usize, n_space: usize },

    #[error("index out of range: {what} {index} (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("operation not allowed under the current boundary regime: {0}")]
    RegimeMismatch(String),

    #[error("Newton solve for slice {slice} did not converge after {iterations} iterations (residual trace {trace:?})")]
    NewtonDivergence {
        slice: usize,
        iterations: usize,
        trace: Vec<f64>,
    },

    #[error("singular Jacobian while solving slice {slice}")]
    SingularJacobian { slice: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
