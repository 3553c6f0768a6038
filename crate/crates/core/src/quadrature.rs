//! Gauss–Legendre rules and their push-forward through tiles and faces.

use crate::error::{Error, Result};
use crate::point::{cross, det, mat_vec, norm, scale, Point, ORIGIN};
use crate::reparam::{SurfaceTile, Tile, TileKind};
use crate::splines::GeometryMap;
use std::sync::OnceLock;

pub const MAX_POINTS: usize = 30;

/// Points and positive weights on a reference shape.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn legendre_table() -> &'static Vec<(Vec<f64>, Vec<f64>)> {
    static TABLE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    TABLE.get_or_init(|| (1..=MAX_POINTS).map(legendre_nodes).collect())
}

/// Gauss–Legendre nodes and weights on `[0, 1]` by Newton iteration on `P_n`.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// One-dimensional Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre_1d(n: usize) -> Result<(&'static [f64], &'static [f64])> {
    if !(1..=MAX_POINTS).contains(&n) {
        return Err(Error::QuadratureOrder(n));
    }
    let (x, w) = &legendre_table()[n - 1];
    Ok((x, w))
}

/// Tensor Gauss–Legendre rule with `n` points per direction on `[0,1]^d`.
pub fn gauss_legendre(n: usize, d: usize) -> Result<QuadratureRule> {
    let (x, w) = gauss_legendre_1d(n)?;
    let mut points = Vec::with_capacity(n.pow(d as u32));
    let mut weights = Vec::with_capacity(points.capacity());
    let nk = if d >= 3 { n } else { 1 };
    let nj = if d >= 2 { n } else { 1 };
    for k in 0..nk {
        for j in 0..nj {
            for i in 0..n {
                let mut p = ORIGIN;
                let mut wt = w[i];
                p[0] = x[i];
                if d >= 2 {
                    p[1] = x[j];
                    wt *= w[j];
                }
                if d >= 3 {
                    p[2] = x[k];
                    wt *= w[k];
                }
                points.push(p);
                weights.push(wt);
            }
        }
    }
    Ok(QuadratureRule { dim: d, points, weights })
}

/// Collapsed (Duffy) Gauss rule with `n^2` points on the unit right triangle.
pub fn collapsed_triangle(n: usize) -> Result<QuadratureRule> {
    let (x, w) = gauss_legendre_1d(n)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let u = x[i];
            points.push([u, x[j] * (1.0 - u), 0.0]);
            weights.push(w[i] * w[j] * (1.0 - u));
        }
    }
    Ok(QuadratureRule { dim: 2, points, weights })
}

/// Reference rule for a tile shape with `n` points per direction.
pub fn rule_for(kind: TileKind, n: usize) -> Result<QuadratureRule> {
    match kind {
        TileKind::Quad => gauss_legendre(n, 2),
        TileKind::Triangle => collapsed_triangle(n),
        TileKind::Hex => gauss_legendre(n, 3),
    }
}

/// Quadrature points and weights in the parametric domain.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappedRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

/// Push a reference rule through a tile: `x_i = T(xi_i)`, `w_i = w det J_T`.
pub fn map_through_tile(tile: &Tile, rule: &QuadratureRule) -> Result<MappedRule> {
    let dim = tile.dim();
    let mut out = MappedRule {
        points: Vec::with_capacity(rule.len()),
        weights: Vec::with_capacity(rule.len()),
    };
    for (xi, &w) in rule.points.iter().zip(&rule.weights) {
        let (x, j) = tile.eval(xi);
        let dj = det(&j, dim);
        if dj <= 0.0 || !dj.is_finite() {
            return Err(Error::ReparamFailure {
                element: tile.element,
                reason: format!("tile Jacobian {dj:e} at reference point {xi:?}"),
            });
        }
        out.points.push(x);
        out.weights.push(w * dj);
    }
    Ok(out)
}

/// Quadrature on a physical boundary face.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryRule {
    /// Parametric points.
    pub points: Vec<Point>,
    /// Physical points `F(x)`.
    pub physical: Vec<Point>,
    /// Weights including the physical length/area element.
    pub weights: Vec<f64>,
    /// Unit outward physical normals.
    pub normals: Vec<Point>,
}

/// Gauss rule on a face pushed through the face map and `F`.
pub fn boundary_rule(face: &SurfaceTile, n: usize, map: &GeometryMap) -> Result<BoundaryRule> {
    let rule = gauss_legendre(n, face.dim - 1)?;
    let mut out = BoundaryRule::default();
    for (s, &w) in rule.points.iter().zip(&rule.weights) {
        let (x, t) = face.eval(&s[..face.dim - 1]);
        let (fx, j) = map.eval(&x);
        let (measure, nrm) = if face.dim == 2 {
            let tp = mat_vec(&j, &t[0], 2);
            let m = norm(&tp);
            (m, [tp[1], -tp[0], 0.0])
        } else {
            let ta = mat_vec(&j, &t[0], 3);
            let tb = mat_vec(&j, &t[1], 3);
            let c = cross(&ta, &tb);
            (norm(&c), c)
        };
        if !(measure > 0.0) {
            return Err(Error::DegenerateFace);
        }
        out.points.push(x);
        out.physical.push(fx);
        out.weights.push(w * measure);
        out.normals.push(scale(&nrm, 1.0 / measure));
    }
    Ok(out)
}
