//! Symbolic tools for three-dimensional Poisson structures: Jacobi checks,
//! family recognition, Casimirs, Darboux charts and trajectory integration.

mod error;
pub mod expr;
pub mod families;
pub mod catalog;
pub mod cli;
pub mod dynamics;
pub mod reduction;
pub mod structure;

pub use error::{Error, Result};

/// Seed used whenever a caller does not pick one.
pub const DEFAULT_SEED: u64 = 42;
