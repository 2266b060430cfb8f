//! Comet-shaped quiver varieties of generalized hyperpolygons: construction,
//! moment-map equations, numerical solving and structural checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branes;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod integrable;
pub mod io;
pub mod linalg;
pub mod moment;
pub mod quiver;
pub mod rep;
pub mod solver;

pub use error::{Error, Result};
pub use quiver::CometQuiver;
pub use rep::Representation;
pub use solver::{solve, solve_polygon, Solution, SolveOptions};
