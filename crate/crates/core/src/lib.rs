//! Trimmed isogeometric analysis on tensor-product B-spline patches.
//!
//! The physical domain is the image of the unit parametric box under a
//! geometry map, restricted to one side of an implicit trimming boundary.
//! Cut Bézier elements are re-parameterized by curved Lagrange tiles that
//! carry the quadrature; the resulting Galerkin systems are solved by
//! diagonally scaled conjugate gradients.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod point;
pub mod quadrature;
pub mod reparam;
pub mod solver;
pub mod sparse;
pub mod splines;
pub mod trimming;
pub mod verify;

pub use error::{Error, Result};
pub use point::{Mat3, Point};
pub use splines::{BasisValues, BezierMesh, GeometryMap, KnotVector, TensorBSplineSpace};
