//! Dense hitting-set testers over finite field towers.
//!
//! A tester is an indexed family of linear maps from `F_{q^t}` to `F_q` such that a nonzero
//! polynomial value at a point survives under at least a `1 - ε` fraction of the maps.
//! The crate builds such families intensionally, gives local access to any single map,
//! serializes them, evaluates the known size and density bounds, and checks the tester
//! property by exhaustive search on small instances.

pub mod error;
pub mod gf;
pub mod irreducibles;
pub mod rational;
pub mod tester;
pub mod constructions;
pub mod bounds;
pub mod verify;

pub use error::{Error, Result, UnconstructibleReason};
