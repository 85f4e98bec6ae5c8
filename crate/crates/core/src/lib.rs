//! Maximal flows and minimal cutsets for first-passage percolation on `Z^d / n`
//! restricted to a bounded domain.

pub mod capacity;
pub mod continuum;
pub mod cutset;
pub mod cylinder;
pub mod discretization;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod lattice;
pub mod maxflow;
pub mod stream;

pub use error::{Error, Result};
