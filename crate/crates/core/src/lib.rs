//! Ideal circle patterns on closed oriented surfaces.
//!
//! Builds the star-vertex triangulation of a weighted cellular decomposition,
//! evaluates the discrete curvature map in Euclidean or hyperbolic background
//! geometry, and drives it to constant curvature with the combinatorial
//! Calabi flow `u' = -L K` or the combinatorial Ricci flows.

pub mod cli;
pub mod complex;
pub mod curvature;
pub mod existence;
pub mod fixtures;
pub mod flow;
pub mod geometry;
pub mod io;

pub use complex::{build_complex, check_star, euler_characteristic, triangulate, CellComplex, Triangulation};
pub use curvature::{curvature_map, jacobian, CurvatureReport, JacobianMatrix, PatternState};
pub use geometry::{Geometry, TwoCircleConfig};
