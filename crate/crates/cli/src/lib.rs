//! Config-driven runs of the msvi integrators: parsing, artifact writing and
//! after-the-fact verification of run directories.

pub mod config;
pub mod data;
pub mod error;
pub mod reconstruct;
pub mod run;
pub mod verify;

pub use config::RunConfig;
pub use error::{CliError, DataError, Result};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Bad config, data or I/O.
    pub const USAGE: i32 = 1;
    pub const SOLVER_FAILURE: i32 = 2;
    pub const INVARIANT_VIOLATION: i32 = 3;
}
