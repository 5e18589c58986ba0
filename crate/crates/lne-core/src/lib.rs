//! Numerical estimation of inner/outer metric distortion for finitely
//! described subsets of Euclidean space, with certification ladders for the
//! Lipschitz normal embedding property locally, at marked points and at
//! infinity, and equivalence harnesses for inversion and one-point
//! compactification.

pub mod analysis;
pub mod descriptor;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod germ;
pub mod graph;
pub mod io;
pub mod network;
pub mod quad;
pub mod sample;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{AmbientMetric, Point, UnitDirection};
