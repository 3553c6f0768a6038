use super::{BasisValues, TensorBSplineSpace};
use crate::error::{Error, Result};
use crate::point::{det, Mat3, Point, ORIGIN};

/// Physical placement of the unit parametric box.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryMap {
    /// Affine map of `[0,1]^d` onto the box `[lo, hi]`.
    IdentityBox { dim: usize, lo: Point, hi: Point },
    /// Box map composed with a smooth swirl that vanishes on the boundary of
    /// the parametric box. Corners and edges stay fixed; knot lines bend.
    PolynomialDistortion { lo: Point, hi: Point, amplitude: f64 },
    /// `F(x) = sum_i B_i(x) P_i` with one control point per basis function.
    SplineCoefficients { space: TensorBSplineSpace, control: Vec<Point> },
}

/// `J = DF` and its determinant at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapJacobian {
    pub j: Mat3,
    pub det: f64,
}

/// Amplitude of the distorted-domain preset.
pub const DISTORTION_AMPLITUDE: f64 = 0.1;

impl GeometryMap {
    pub fn identity_box(dim: usize, lo: Point, hi: Point) -> Self {
        GeometryMap::IdentityBox { dim, lo, hi }
    }

    /// The distorted preset used for the smooth-map Poisson study.
    pub fn distorted(lo: Point, hi: Point) -> Self {
        GeometryMap::PolynomialDistortion { lo, hi, amplitude: DISTORTION_AMPLITUDE }
    }

    /// Spline map whose control points sit at the Greville abscissae mapped
    /// affinely onto `[lo, hi]`; reproduces the affine box map exactly.
    pub fn greville_box(space: TensorBSplineSpace, lo: Point, hi: Point) -> Self {
        let dim = space.dim();
        let grev: Vec<Vec<f64>> = (0..dim).map(|d| space.knot_vector(d).greville()).collect();
        let control = (0..space.num_basis())
            .map(|i| {
                let m = space.multi_index(i);
                let mut p = ORIGIN;
                for d in 0..dim {
                    p[d] = lo[d] + (hi[d] - lo[d]) * grev[d][m[d]];
                }
                p
            })
            .collect();
        GeometryMap::SplineCoefficients { space, control }
    }

    pub fn dim(&self) -> usize {
        match self {
            GeometryMap::IdentityBox { dim, .. } => *dim,
            GeometryMap::PolynomialDistortion { .. } => 2,
            GeometryMap::SplineCoefficients { space, .. } => space.dim(),
        }
    }

    pub fn map_point(&self, x: &Point) -> Point {
        self.eval(x).0
    }

    /// Jacobian with the validity check `det(DF) > 0`.
    pub fn map_jacobian(&self, x: &Point) -> Result<MapJacobian> {
        let jac = self.jacobian(x);
        if jac.det > 0.0 {
            Ok(jac)
        } else {
            Err(Error::GeometryValidity { det: jac.det, point: *x })
        }
    }

    /// Jacobian without the validity check.
    pub fn jacobian(&self, x: &Point) -> MapJacobian {
        let j = self.eval(x).1;
        MapJacobian { j, det: det(&j, self.dim()) }
    }

    /// Image point and Jacobian.
    pub fn eval(&self, x: &Point) -> (Point, Mat3) {
        match self {
            GeometryMap::IdentityBox { dim, lo, hi } => {
                let mut p = ORIGIN;
                let mut j = [[0.0; 3]; 3];
                for d in 0..*dim {
                    p[d] = lo[d] + (hi[d] - lo[d]) * x[d];
                    j[d][d] = hi[d] - lo[d];
                }
                (p, j)
            }
            GeometryMap::PolynomialDistortion { lo, hi, amplitude } => {
                let (u, v) = (x[0], x[1]);
                let a = *amplitude;
                let b = 16.0 * u * (1.0 - u) * v * (1.0 - v);
                let bu = 16.0 * (1.0 - 2.0 * u) * v * (1.0 - v);
                let bv = 16.0 * u * (1.0 - u) * (1.0 - 2.0 * v);
                // swirl: delta = a * b * (1 - 2v, 2u - 1)
                let dx = a * b * (1.0 - 2.0 * v);
                let dy = a * b * (2.0 * u - 1.0);
                let dx_u = a * bu * (1.0 - 2.0 * v);
                let dx_v = a * (bv * (1.0 - 2.0 * v) - 2.0 * b);
                let dy_u = a * (bu * (2.0 * u - 1.0) + 2.0 * b);
                let dy_v = a * bv * (2.0 * u - 1.0);
                let (sx, sy) = (hi[0] - lo[0], hi[1] - lo[1]);
                let p = [lo[0] + sx * (u + dx), lo[1] + sy * (v + dy), 0.0];
                let j = [
                    [sx * (1.0 + dx_u), sx * dx_v, 0.0],
                    [sy * dy_u, sy * (1.0 + dy_v), 0.0],
                    [0.0; 3],
                ];
                (p, j)
            }
            GeometryMap::SplineCoefficients { space, control } => {
                let dim = space.dim();
                let mut xe = *x;
                for v in xe.iter_mut().take(dim) {
                    *v = v.clamp(0.0, 1.0);
                }
                let e = space.find_element(&xe);
                let mut bv = BasisValues::default();
                space.eval_into(e, &xe, &mut bv);
                let mut p = ORIGIN;
                let mut j = [[0.0; 3]; 3];
                for ((&i, &val), g) in bv.indices.iter().zip(&bv.values).zip(&bv.gradients) {
                    let c = &control[i];
                    for a in 0..dim {
                        p[a] += val * c[a];
                        for b in 0..dim {
                            j[a][b] += c[a] * g[b];
                        }
                    }
                }
                (p, j)
            }
        }
    }

    /// Diameter of the physical image, estimated from the parametric corners.
    pub fn diameter(&self) -> f64 {
        let dim = self.dim();
        let corners = 1usize << dim;
        let pts: Vec<Point> = (0..corners)
            .map(|c| {
                let mut x = ORIGIN;
                for d in 0..dim {
                    x[d] = ((c >> d) & 1) as f64;
                }
                self.map_point(&x)
            })
            .collect();
        let mut diam: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                diam = diam.max(crate::point::norm(&crate::point::sub(a, b)));
            }
        }
        diam
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn box_center_and_jacobian() {
        let l = 2.0 / 0.7;
        let m = GeometryMap::identity_box(2, [-l / 2.0, -l / 2.0, 0.0], [l / 2.0, l / 2.0, 0.0]);
        let c = m.map_point(&[0.5, 0.5, 0.0]);
        assert!(c[0].abs() < 1e-15 && c[1].abs() < 1e-15);
        let j = m.map_jacobian(&[0.2, 0.9, 0.0]).unwrap();
        assert!((j.det - l * l).abs() < 1e-12);
    }

    #[test]
    fn distortion_fixes_corners_and_matches_finite_differences() {
        let m = GeometryMap::distorted([-1.0, -2.0, 0.0], [3.0, 1.0, 0.0]);
        for (c, e) in [([0.0, 0.0], [-1.0, -2.0]), ([1.0, 1.0], [3.0, 1.0]), ([1.0, 0.0], [3.0, -2.0])] {
            let p = m.map_point(&[c[0], c[1], 0.0]);
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..50 {
            let x = [rng.random::<f64>(), rng.random::<f64>(), 0.0];
            let jac = m.map_jacobian(&x).unwrap();
            for b in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[b] += h;
                xm[b] -= h;
                let (fp, fm) = (m.map_point(&xp), m.map_point(&xm));
                for a in 0..2 {
                    let fd = (fp[a] - fm[a]) / (2.0 * h);
                    assert!((fd - jac.j[a][b]).abs() <= 1e-6 * jac.j[a][b].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn greville_control_net_reproduces_identity() {
        let space = TensorBSplineSpace::uniform(2, 3, 5);
        let m = GeometryMap::greville_box(space, [0.0; 3], [1.0, 1.0, 0.0]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.random::<f64>(), rng.random::<f64>(), 0.0];
            let p = m.map_point(&x);
            assert!((p[0] - x[0]).abs() < 1e-13 && (p[1] - x[1]).abs() < 1e-13);
        }
    }
}
