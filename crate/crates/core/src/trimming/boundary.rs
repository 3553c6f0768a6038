use crate::point::{dot, mat_t_vec, norm, scale, sub, Point, ORIGIN};
use crate::splines::GeometryMap;

/// Implicit shape whose zero level set is the trimming boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// No trimming: the whole patch is kept.
    None,
    /// `|x - c| - R` in the plane.
    Circle { center: Point, radius: f64 },
    /// `|x - c| - R` in space.
    Sphere { center: Point, radius: f64 },
    /// `(x - p) . n` with unit normal `n`.
    Plane { point: Point, normal: Point },
}

/// Which sign of `phi` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeepSide {
    Negative,
    Positive,
}

/// Signed implicit description of the trimming boundary with its keep side.
///
/// The kept region is `{x : s * phi(x) < 0}` with `s = 1` for
/// [`KeepSide::Negative`] and `s = -1` otherwise. Throughout the crate
/// `psi = s * phi o F` is the parametric indicator: kept iff `psi < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimmingBoundary {
    pub shape: Shape,
    pub keep: KeepSide,
}

impl TrimmingBoundary {
    pub fn none() -> Self {
        Self { shape: Shape::None, keep: KeepSide::Negative }
    }

    pub fn circle(center: Point, radius: f64, keep: KeepSide) -> Self {
        Self { shape: Shape::Circle { center, radius }, keep }
    }

    pub fn sphere(center: Point, radius: f64, keep: KeepSide) -> Self {
        Self { shape: Shape::Sphere { center, radius }, keep }
    }

    pub fn plane(point: Point, normal: Point, keep: KeepSide) -> Self {
        let n = scale(&normal, 1.0 / norm(&normal));
        Self { shape: Shape::Plane { point, normal: n }, keep }
    }

    pub fn is_trimmed(&self) -> bool {
        self.shape != Shape::None
    }

    /// Length scale used for root tolerances.
    pub fn length_scale(&self) -> f64 {
        match self.shape {
            Shape::Circle { radius, .. } | Shape::Sphere { radius, .. } => radius,
            _ => 1.0,
        }
    }

    pub fn keep_sign(&self) -> f64 {
        match self.keep {
            KeepSide::Negative => 1.0,
            KeepSide::Positive => -1.0,
        }
    }

    /// `phi` at a physical point. Untrimmed boundaries return `-inf`.
    pub fn phi(&self, x: &Point) -> f64 {
        match self.shape {
            Shape::None => f64::NEG_INFINITY * self.keep_sign(),
            Shape::Circle { center, radius } => {
                let d = sub(x, &center);
                (d[0] * d[0] + d[1] * d[1]).sqrt() - radius
            }
            Shape::Sphere { center, radius } => norm(&sub(x, &center)) - radius,
            Shape::Plane { point, normal } => dot(&sub(x, &point), &normal),
        }
    }

    pub fn grad_phi(&self, x: &Point) -> Point {
        match self.shape {
            Shape::None => ORIGIN,
            Shape::Circle { center, .. } => {
                let d = sub(x, &center);
                let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if r == 0.0 {
                    ORIGIN
                } else {
                    [d[0] / r, d[1] / r, 0.0]
                }
            }
            Shape::Sphere { center, .. } => {
                let d = sub(x, &center);
                let r = norm(&d);
                if r == 0.0 {
                    ORIGIN
                } else {
                    scale(&d, 1.0 / r)
                }
            }
            Shape::Plane { normal, .. } => normal,
        }
    }

    /// Unit normal of the level set through `x`, pointing out of the kept region.
    pub fn outward_normal(&self, x: &Point) -> Point {
        let g = self.grad_phi(x);
        let n = norm(&g);
        if n == 0.0 {
            ORIGIN
        } else {
            scale(&g, self.keep_sign() / n)
        }
    }

    /// Kept-region test at a physical point (boundary excluded).
    pub fn keeps(&self, x: &Point) -> bool {
        !self.is_trimmed() || self.keep_sign() * self.phi(x) < 0.0
    }

    /// `psi = s * phi(F(xhat))`.
    pub fn psi(&self, map: &GeometryMap, xhat: &Point) -> f64 {
        self.keep_sign() * self.phi(&map.map_point(xhat))
    }

    /// `psi` and its parametric gradient `s * DF^T grad phi`.
    pub fn psi_grad(&self, map: &GeometryMap, xhat: &Point) -> (f64, Point) {
        let (x, j) = map.eval(xhat);
        let s = self.keep_sign();
        let g = mat_t_vec(&j, &self.grad_phi(&x), map.dim());
        (s * self.phi(&x), scale(&g, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keep_side_conventions() {
        let inside = TrimmingBoundary::circle(ORIGIN, 1.0, KeepSide::Negative);
        let outside = TrimmingBoundary::circle(ORIGIN, 1.0, KeepSide::Positive);
        assert!(inside.keeps(&[0.5, 0.0, 0.0]) && !inside.keeps(&[1.5, 0.0, 0.0]));
        assert!(!outside.keeps(&[0.5, 0.0, 0.0]) && outside.keeps(&[1.5, 0.0, 0.0]));
        let n = inside.outward_normal(&[0.0, 1.0, 0.0]);
        assert!((n[1] - 1.0).abs() < 1e-15);
        let n = outside.outward_normal(&[0.0, 1.0, 0.0]);
        assert!((n[1] + 1.0).abs() < 1e-15);
        assert!(TrimmingBoundary::none().keeps(&[1e9, 0.0, 0.0]));
    }
}
