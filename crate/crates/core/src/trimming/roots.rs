use super::TrimmingBoundary;
use crate::point::{dot, lerp, mat_vec, sub, Point};
use crate::splines::GeometryMap;

/// Number of uniform sub-intervals scanned for sign changes.
pub const SCAN_INTERVALS: usize = 64;

/// Roots of `phi o F` along a parametric segment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SegmentRoots {
    /// Interior roots `t` in `(0, 1)`, ascending.
    pub roots: Vec<f64>,
    /// `phi` vanishes (within tolerance) at `t = 0`.
    pub touches_start: bool,
    /// `phi` vanishes (within tolerance) at `t = 1`.
    pub touches_end: bool,
}

impl SegmentRoots {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty() && !self.touches_start && !self.touches_end
    }
}

/// Locate the zeros of `phi(F(a + t (b - a)))` for `t` in `[0, 1]`.
pub fn intersect_segment(
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    a: &Point,
    b: &Point,
) -> SegmentRoots {
    let mut out = SegmentRoots::default();
    if !boundary.is_trimmed() {
        return out;
    }
    let tol = 1e-13 * boundary.length_scale();
    let f = |t: f64| boundary.phi(&map.map_point(&lerp(a, b, t)));
    let n = SCAN_INTERVALS;
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
    out.touches_start = vals[0].abs() <= tol;
    out.touches_end = vals[n].abs() <= tol;
    for i in 0..n {
        let (t0, t1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
        let (f0, f1) = (vals[i], vals[i + 1]);
        if i > 0 && f0.abs() <= tol {
            out.roots.push(t0);
            continue;
        }
        if f0.abs() <= tol || f1.abs() <= tol {
            continue;
        }
        if f0.signum() != f1.signum() {
            out.roots.push(polish(boundary, map, a, b, t0, t1, f0, tol));
        }
    }
    out
}

/// Single root of `phi o F` on a segment whose endpoint values bracket it.
/// Returns `t` in `[0, 1]`, or `None` when the endpoint signs agree.
pub fn bracketed_root(
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    a: &Point,
    b: &Point,
) -> Option<f64> {
    let tol = 1e-13 * boundary.length_scale();
    let f0 = boundary.phi(&map.map_point(a));
    let f1 = boundary.phi(&map.map_point(b));
    if f0.abs() <= tol {
        return Some(0.0);
    }
    if f1.abs() <= tol {
        return Some(1.0);
    }
    if f0.signum() == f1.signum() {
        return None;
    }
    Some(polish(boundary, map, a, b, 0.0, 1.0, f0, tol))
}

/// Safeguarded Newton on a sign-changing bracket.
#[allow(clippy::too_many_arguments)]
fn polish(
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    a: &Point,
    b: &Point,
    mut lo: f64,
    mut hi: f64,
    f_lo: f64,
    tol: f64,
) -> f64 {
    let dir = sub(b, a);
    let dim = map.dim();
    let lo_sign = f_lo.signum();
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let xh = lerp(a, b, t);
        let (x, j) = map.eval(&xh);
        let ft = boundary.phi(&x);
        if ft.abs() <= tol {
            return t;
        }
        if ft.signum() == lo_sign {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            return t;
        }
        let d = dot(&boundary.grad_phi(&x), &mat_vec(&j, &dir, dim));
        let newton = if d != 0.0 { t - ft / d } else { f64::NAN };
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trimming::KeepSide;

    #[test]
    fn circle_crossing_at_half() {
        let b = TrimmingBoundary::circle([0.0; 3], 1.0, KeepSide::Negative);
        let m = GeometryMap::identity_box(2, [0.0; 3], [1.0, 1.0, 0.0]);
        // identity map: parametric segment (0,0) -> (2,0) is outside the box
        // but the map is affine, so it extends naturally
        let r = intersect_segment(&b, &m, &[0.0, 0.0, 0.0], &[2.0, 0.0, 0.0]);
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - 0.5).abs() < 1e-14);
        let r = intersect_segment(&b, &m, &[0.1, 0.1, 0.0], &[0.5, 0.2, 0.0]);
        assert!(r.is_empty());
    }

    #[test]
    fn sphere_edge_root() {
        let b = TrimmingBoundary::sphere([0.0; 3], 1.0, KeepSide::Negative);
        let m = GeometryMap::identity_box(3, [0.0; 3], [1.0; 3]);
        let r = intersect_segment(&b, &m, &[0.9, 0.3, 0.3], &[1.0, 0.3, 0.3]);
        assert_eq!(r.roots.len(), 1);
        let x = 0.9 + 0.1 * r.roots[0];
        assert!((x - 0.82f64.sqrt()).abs() < 1e-13, "{x}");
    }

    #[test]
    fn bracketed_root_on_column() {
        let b = TrimmingBoundary::circle([0.0; 3], 1.0, KeepSide::Negative);
        let m = GeometryMap::identity_box(2, [0.0; 3], [1.0, 1.0, 0.0]);
        let t = bracketed_root(&b, &m, &[0.6, 0.0, 0.0], &[0.6, 1.0, 0.0]).unwrap();
        assert!((t - 0.8).abs() < 1e-14);
        assert_eq!(bracketed_root(&b, &m, &[0.1, 0.0, 0.0], &[0.1, 0.5, 0.0]), None);
    }

    #[test]
    fn endpoint_touch_is_flagged() {
        let b = TrimmingBoundary::circle([0.0; 3], 1.0, KeepSide::Positive);
        let m = GeometryMap::identity_box(2, [0.0; 3], [4.0, 4.0, 0.0]);
        let r = intersect_segment(&b, &m, &[0.25, 0.0, 0.0], &[0.375, 0.0, 0.0]);
        assert!(r.touches_start && !r.touches_end && r.roots.is_empty());
    }
}
