//! Illuminating-coordinate geometry, Morawetz-type multiplier identities and
//! decay diagnostics for `□u = −u⁵` outside obstacles.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod multiplier;
pub mod solver;

pub use error::{Error, Result};
