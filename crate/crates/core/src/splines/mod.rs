//! Open-knot B-spline spaces, their Bézier meshes and the geometry map.

mod geometry;
mod knots;
mod mesh;
mod space;

pub use geometry::{GeometryMap, MapJacobian, DISTORTION_AMPLITUDE};
pub use knots::KnotVector;
pub use mesh::{image_diameter, BezierElement, BezierMesh};
pub use space::{BasisValues, TensorBSplineSpace};
