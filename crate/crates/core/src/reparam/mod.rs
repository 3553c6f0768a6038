//! Local re-parameterization of cut elements by curved Lagrange tiles.
//!
//! The kept part of a cut box is decomposed into columns along a "vertical"
//! parametric direction in which the trimming boundary is a graph. Each
//! column is bounded by straight box faces and by the graph, and is sampled
//! at equidistant Lagrange nodes to give one degree-`r` tile. When the graph
//! property or the tile validity checks fail, the box is split dyadically.

mod build2d;
mod build3d;
mod lagrange;
mod tile;


pub use lagrange::{lagrange_1d, lagrange_triangle, triangle_node_coords, triangle_nodes};
pub use tile::{FaceTag, SurfaceTile, Tile, TileKind};

use crate::error::{Error, Result};
use crate::point::{norm, sub, Point, ORIGIN};
use crate::quadrature::rule_for;
use crate::splines::{BezierElement, BezierMesh, GeometryMap};
use crate::trimming::{
    bracketed_root, classify_box, eps_geo, ElementClassification, ElementLabel, TrimmingBoundary,
};
use rayon::prelude::*;
use std::io::Write;

/// Construction parameters shared by all cut elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReparamOptions {
    /// Tile degree `r`.
    pub degree: usize,
    /// Number of tiles each curved column is split into (2D only).
    pub ht_divisions: usize,
    /// Gauss points per direction used downstream; the Jacobian is checked there.
    pub quad_points: usize,
    /// Emulated geometric precision in parametric units; 0 means exact.
    pub geo_precision: f64,
    /// Maximum number of dyadic subdivisions.
    pub max_depth: usize,
}

impl ReparamOptions {
    pub fn new(degree: usize) -> Self {
        Self { degree, ht_divisions: 1, quad_points: degree + 1, geo_precision: 0.0, max_depth: 4 }
    }
}

/// How the trimming curve crosses a 2D element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutTopology {
    /// Two adjacent edges (a corner is cut off).
    Corner,
    /// Two opposite edges.
    Opposite,
    /// The same edge twice.
    Cap,
    /// Only touched at corners, or more than two crossings resolved by subdivision.
    Other,
}

/// Tiles covering the kept part of one cut element.
#[derive(Debug, Clone, PartialEq)]
pub struct CutElementReparam {
    pub element: [usize; 3],
    pub lo: Point,
    pub hi: Point,
    pub tiles: Vec<Tile>,
    pub subdivision_depth: usize,
    /// Crossing pattern of the unsubdivided element (2D only).
    pub topology: Option<CutTopology>,
}

/// Validity summary of a re-parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub min_det_j: f64,
    pub max_phi_on_gamma_h: f64,
    pub contained: bool,
}

/// Per-element construction context.
pub(crate) struct Builder<'a> {
    pub boundary: &'a TrimmingBoundary,
    pub map: &'a GeometryMap,
    pub opts: ReparamOptions,
    pub element: [usize; 3],
    pub eps_geo: f64,
    pub eps_fit: f64,
    pub samples: usize,
}

/// Failure of one decomposition attempt; triggers subdivision.
pub(crate) enum Attempt {
    Topology(String),
    Invalid(String),
}

impl<'a> Builder<'a> {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Deterministic offset in `[-geo_precision, geo_precision]` keyed by the
    /// element and the given coordinates.
    pub fn perturbation(&self, key: &[f64]) -> f64 {
        let gp = self.opts.geo_precision;
        if gp == 0.0 {
            return 0.0;
        }
        let mut h = 0x9e37_79b9_7f4a_7c15u64;
        for &e in &self.element {
            h = splitmix(h ^ e as u64);
        }
        for &k in key {
            h = splitmix(h ^ k.to_bits());
        }
        let xi = (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        xi * gp
    }

    /// Root of `psi` on the column through `base` along `axis` within
    /// `[lo, hi]`, perturbed and clamped. Returns the endpoint of smaller
    /// `|psi|` when the column has no sign change.
    pub fn column_root(&self, base: &Point, axis: usize, lo: f64, hi: f64) -> f64 {
        let mut a = *base;
        let mut b = *base;
        a[axis] = lo;
        b[axis] = hi;
        let t = match bracketed_root(self.boundary, self.map, &a, &b) {
            Some(t) => t,
            None => {
                let fa = self.boundary.psi(self.map, &a).abs();
                let fb = self.boundary.psi(self.map, &b).abs();
                if fa <= fb {
                    0.0
                } else {
                    1.0
                }
            }
        };
        let v = lo + t * (hi - lo) + self.perturbation(&base[..self.dim()]);
        v.clamp(lo, hi)
    }

    /// Build tiles for a box, subdividing on failure.
    fn build_box(&self, lo: &Point, hi: &Point, depth: usize, tiles: &mut Vec<Tile>) -> Result<usize> {
        // the caller has already established that the element itself is cut
        let label = if depth == 0 {
            ElementLabel::Cut
        } else {
            classify_box(self.boundary, self.map, lo, hi, self.samples, self.eps_geo, self.element)?
        };
        match label {
            ElementLabel::Exterior => return Ok(depth),
            ElementLabel::Interior => {
                tiles.push(Tile::affine_box(self.dim(), self.opts.degree, lo, hi, self.element));
                return Ok(depth);
            }
            ElementLabel::Cut => {}
        }
        let attempt = if self.dim() == 2 {
            build2d::decompose(self, lo, hi)
        } else {
            build3d::decompose(self, lo, hi)
        };
        let failure = match attempt {
            Ok(t) => match self.check(&t, lo, hi) {
                Ok(()) => {
                    tiles.extend(t);
                    return Ok(depth);
                }
                Err(reason) => Attempt::Invalid(reason),
            },
            Err(f) => f,
        };
        if depth >= self.opts.max_depth {
            return Err(match failure {
                Attempt::Topology(reason) => Error::DegenerateTopology { element: self.element, reason },
                Attempt::Invalid(reason) => Error::ReparamFailure { element: self.element, reason },
            });
        }
        let dim = self.dim();
        let mut deepest = depth + 1;
        for c in 0..1usize << dim {
            let mut clo = *lo;
            let mut chi = *hi;
            for d in 0..dim {
                let mid = 0.5 * (lo[d] + hi[d]);
                if (c >> d) & 1 == 1 {
                    clo[d] = mid;
                } else {
                    chi[d] = mid;
                }
            }
            deepest = deepest.max(self.build_box(&clo, &chi, depth + 1, tiles)?);
        }
        Ok(deepest)
    }

    /// Jacobian positivity at the downstream quadrature points, fit of the
    /// trimmed faces and containment in the box.
    fn check(&self, tiles: &[Tile], lo: &Point, hi: &Point) -> std::result::Result<(), String> {
        let report = validate_tiles(tiles, self.boundary, self.map, self.opts.quad_points, lo, hi, self.eps_geo_param());
        if !(report.min_det_j > 0.0) {
            return Err(format!("tile Jacobian {:e}", report.min_det_j));
        }
        if report.max_phi_on_gamma_h > self.eps_fit {
            return Err(format!("trimmed-face residual {:e}", report.max_phi_on_gamma_h));
        }
        if !report.contained {
            return Err("tile node outside the element".into());
        }
        Ok(())
    }

    fn eps_geo_param(&self) -> f64 {
        1e-12
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn validate_tiles(
    tiles: &[Tile],
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    quad_points: usize,
    lo: &Point,
    hi: &Point,
    slack: f64,
) -> ValidationReport {
    let mut min_det = f64::INFINITY;
    let mut max_phi: f64 = 0.0;
    let mut contained = true;
    for t in tiles {
        let dim = t.dim();
        let rule = rule_for(t.kind, quad_points).expect("validated quadrature order");
        for xi in &rule.points {
            min_det = min_det.min(t.det_jacobian(xi));
        }
        for x in &t.nodes {
            for d in 0..dim {
                if x[d] < lo[d] - slack || x[d] > hi[d] + slack {
                    contained = false;
                }
            }
        }
        for (f, tag) in t.faces.iter().enumerate() {
            if *tag == FaceTag::Trimmed {
                for x in t.face_nodes(f) {
                    max_phi = max_phi.max(boundary.phi(&map.map_point(&x)).abs());
                }
            }
        }
    }
    ValidationReport { min_det_j: min_det, max_phi_on_gamma_h: max_phi, contained }
}

/// Minimum tile Jacobian at the quadrature points, maximum `|phi o F|` over
/// trimmed-face nodes, and containment of all nodes in the element box.
pub fn validate(
    reparam: &CutElementReparam,
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    quad_points: usize,
) -> ValidationReport {
    validate_tiles(&reparam.tiles, boundary, map, quad_points, &reparam.lo, &reparam.hi, 1e-12)
}

/// Re-parameterize one cut element.
pub fn reparam_cut_element(
    element: &BezierElement,
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    opts: &ReparamOptions,
) -> Result<CutElementReparam> {
    let label = classify_box(boundary, map, &element.lo, &element.hi, opts.degree + 2, eps_geo(map), element.index)?;
    if label != ElementLabel::Cut {
        return Err(Error::NotCut { element: element.index });
    }
    build_element(element, boundary, map, opts)
}

fn build_element(
    element: &BezierElement,
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    opts: &ReparamOptions,
) -> Result<CutElementReparam> {
    if !(1..=crate::quadrature::MAX_POINTS).contains(&opts.quad_points) {
        return Err(Error::QuadratureOrder(opts.quad_points));
    }
    if opts.degree == 0 || opts.degree > 10 || opts.ht_divisions == 0 {
        return Err(Error::InvalidProblem(format!(
            "tile degree {} and h_t divisions {} must be positive (degree at most 10)",
            opts.degree, opts.ht_divisions
        )));
    }
    let dim = map.dim();
    let diam = map.diameter();
    let grad_scale = grad_scale(boundary, map, &element.lo, &element.hi);
    let b = Builder {
        boundary,
        map,
        opts: *opts,
        element: element.index,
        eps_geo: eps_geo(map),
        eps_fit: 1e-13 * diam.max(boundary.length_scale()) + 4.0 * opts.geo_precision * grad_scale,
        samples: opts.degree + 2,
    };
    let topology = if dim == 2 { Some(build2d::topology(&b, &element.lo, &element.hi)) } else { None };
    let mut tiles = Vec::new();
    let depth = b.build_box(&element.lo, &element.hi, 0, &mut tiles)?;
    tag_domain_faces(&mut tiles, dim);
    Ok(CutElementReparam {
        element: element.index,
        lo: element.lo,
        hi: element.hi,
        tiles,
        subdivision_depth: depth,
        topology,
    })
}

/// 2D entry point; see [`reparam_cut_element`].
pub fn reparam_cut_element_2d(
    element: &BezierElement,
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    opts: &ReparamOptions,
) -> Result<CutElementReparam> {
    if map.dim() != 2 {
        return Err(Error::Dimension("2D re-parameterization on a 3D map".into()));
    }
    reparam_cut_element(element, boundary, map, opts)
}

/// 3D entry point; see [`reparam_cut_element`].
pub fn reparam_cut_element_3d(
    element: &BezierElement,
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    opts: &ReparamOptions,
) -> Result<CutElementReparam> {
    if map.dim() != 3 {
        return Err(Error::Dimension("3D re-parameterization on a 2D map".into()));
    }
    reparam_cut_element(element, boundary, map, opts)
}

/// Re-parameterize every Cut element; other entries are `None`.
pub fn reparam_all(
    mesh: &BezierMesh,
    classification: &ElementClassification,
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    opts: &ReparamOptions,
) -> Result<Vec<Option<CutElementReparam>>> {
    mesh.elements
        .par_iter()
        .zip(&classification.labels)
        .map(|(e, &label)| match label {
            ElementLabel::Cut => build_element(e, boundary, map, opts).map(Some),
            _ => Ok(None),
        })
        .collect()
}

/// Largest parametric gradient of `psi` sampled on a box.
fn grad_scale(boundary: &TrimmingBoundary, map: &GeometryMap, lo: &Point, hi: &Point) -> f64 {
    if !boundary.is_trimmed() {
        return 0.0;
    }
    let dim = map.dim();
    let mut g: f64 = 0.0;
    for c in 0..3usize.pow(dim as u32) {
        let mut x = ORIGIN;
        let mut rest = c;
        for d in 0..dim {
            x[d] = lo[d] + 0.5 * (rest % 3) as f64 * (hi[d] - lo[d]);
            rest /= 3;
        }
        g = g.max(norm(&boundary.psi_grad(map, &x).1));
    }
    g
}

/// Mark non-degenerate inner faces that lie on a face of the parametric patch.
pub fn tag_domain_faces(tiles: &mut [Tile], dim: usize) {
    const TOL: f64 = 1e-14;
    for t in tiles.iter_mut() {
        for f in 0..t.faces.len() {
            if t.faces[f] != FaceTag::Inner {
                continue;
            }
            let nodes = t.face_nodes(f);
            for axis in 0..dim {
                for (side, target) in [(0usize, 0.0f64), (1, 1.0)] {
                    if nodes.iter().all(|x| (x[axis] - target).abs() <= TOL)
                        && face_extent(&nodes) > 1e-13
                    {
                        t.faces[f] = FaceTag::DomainBoundary(2 * axis + side);
                    }
                }
            }
        }
    }
}

fn face_extent(nodes: &[Point]) -> f64 {
    let mut e: f64 = 0.0;
    for a in nodes {
        e = e.max(norm(&sub(a, &nodes[0])));
    }
    e
}

/// Tile faces on the trimmed boundary or on the patch boundary, with
/// outward orientation. Faces of zero extent are skipped.
pub fn boundary_faces(reparam: &CutElementReparam) -> Vec<SurfaceTile> {
    let mut out = Vec::new();
    for t in &reparam.tiles {
        for (f, &tag) in t.faces.iter().enumerate() {
            if tag == FaceTag::Inner {
                continue;
            }
            let nodes = t.face_nodes(f);
            if face_extent(&nodes) <= 1e-13 {
                continue;
            }
            out.push(SurfaceTile { dim: t.dim(), degree: t.degree, nodes, tag, element: t.element });
        }
    }
    out
}

/// Plain-text dump of tile outlines for plotting: one `tile` header per tile
/// followed by sampled boundary points, and `face` records for tagged faces.
pub fn debug_dump<W: Write>(reparams: &[CutElementReparam], samples: usize, w: &mut W) -> std::io::Result<()> {
    for rp in reparams {
        for (i, t) in rp.tiles.iter().enumerate() {
            writeln!(w, "tile {:?} element {:?} index {} degree {}", t.kind, rp.element, i, t.degree)?;
            for f in 0..t.faces.len() {
                writeln!(w, "face {} {:?}", f, t.faces[f])?;
                if t.dim() == 2 {
                    for k in 0..=samples {
                        let s = k as f64 / samples as f64;
                        let x = t.map(&t.kind.face_point(f, &[s]));
                        writeln!(w, "{:.17e} {:.17e}", x[0], x[1])?;
                    }
                } else {
                    for b in 0..=samples {
                        for a in 0..=samples {
                            let s = [a as f64 / samples as f64, b as f64 / samples as f64];
                            let x = t.map(&t.kind.face_point(f, &s));
                            writeln!(w, "{:.17e} {:.17e} {:.17e}", x[0], x[1], x[2])?;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
