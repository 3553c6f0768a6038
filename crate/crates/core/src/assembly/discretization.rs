use super::BoundaryPart;
use crate::error::{Error, Result};
use crate::point::{det, inv_transpose, Mat3, Point, ORIGIN};
use crate::quadrature::{boundary_rule, map_through_tile, rule_for, BoundaryRule, MappedRule};
use crate::reparam::{boundary_faces, reparam_all, CutElementReparam, FaceTag, ReparamOptions, Tile};
use crate::splines::{BezierMesh, GeometryMap, TensorBSplineSpace};
use crate::trimming::{active_index_set, classify, ElementClassification, ElementLabel, TrimmingBoundary};

/// A volume quadrature point pulled back to the parametric domain.
#[derive(Debug, Clone, Copy)]
pub struct VolumePoint {
    pub param: Point,
    pub physical: Point,
    /// Reference weight times tile and geometry Jacobians.
    pub weight: f64,
    /// `DF^{-T}`, mapping parametric to physical gradients.
    pub inv_t: Mat3,
}

/// Everything that depends on geometry and mesh but not on the PDE.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub space: TensorBSplineSpace,
    pub map: GeometryMap,
    pub boundary: TrimmingBoundary,
    pub mesh: BezierMesh,
    pub classification: ElementClassification,
    pub reparams: Vec<Option<CutElementReparam>>,
    /// Sorted global indices of active functions.
    pub active: Vec<usize>,
    /// Position in `active` of each global function, `usize::MAX` if inactive.
    pub local_of: Vec<usize>,
    /// Gauss points per direction.
    pub quad_points: usize,
}

impl Discretization {
    /// Classify, re-parameterize cut elements and collect active functions.
    /// Cut elements whose kept part has no tiles are relabeled Exterior.
    pub fn new(
        space: TensorBSplineSpace,
        map: GeometryMap,
        boundary: TrimmingBoundary,
        opts: &ReparamOptions,
    ) -> Result<Self> {
        if space.dim() != map.dim() {
            return Err(Error::Dimension(format!("space is {}D, map is {}D", space.dim(), map.dim())));
        }
        let mesh = BezierMesh::new(&space, &map);
        let mut classification = classify(&mesh, &map, &boundary)?;
        let reparams = reparam_all(&mesh, &classification, &boundary, &map, opts)?;
        let mut reparams: Vec<Option<CutElementReparam>> = reparams;
        for (flat, rp) in reparams.iter_mut().enumerate() {
            if rp.as_ref().is_some_and(|r| r.tiles.is_empty()) {
                classification.labels[flat] = ElementLabel::Exterior;
                *rp = None;
            }
        }
        let active = active_index_set(&space, &classification);
        let mut local_of = vec![usize::MAX; space.num_basis()];
        for (k, &i) in active.iter().enumerate() {
            local_of[i] = k;
        }
        Ok(Self {
            space,
            map,
            boundary,
            mesh,
            classification,
            reparams,
            active,
            local_of,
            quad_points: opts.quad_points,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn label(&self, flat: usize) -> ElementLabel {
        self.classification.labels[flat]
    }

    /// Elements that carry quadrature (Interior or Cut), in flat order.
    pub fn active_elements(&self) -> Vec<usize> {
        (0..self.mesh.len()).filter(|&e| self.label(e) != ElementLabel::Exterior).collect()
    }

    /// Parametric quadrature of one element: tensor Gauss on Interior
    /// elements, tile-mapped rules on Cut elements, nothing on Exterior.
    pub fn element_rule(&self, flat: usize) -> Result<MappedRule> {
        let n = self.quad_points;
        let e = &self.mesh.elements[flat];
        match self.label(flat) {
            ElementLabel::Exterior => Ok(MappedRule::default()),
            ElementLabel::Interior => {
                let t = Tile::affine_box(self.dim(), 1, &e.lo, &e.hi, e.index);
                map_through_tile(&t, &rule_for(t.kind, n)?)
            }
            ElementLabel::Cut => {
                let rp = self.reparams[flat].as_ref().ok_or(Error::MissingReparam(e.index))?;
                let mut out = MappedRule::default();
                for t in &rp.tiles {
                    let m = map_through_tile(t, &rule_for(t.kind, n)?)?;
                    out.points.extend(m.points);
                    out.weights.extend(m.weights);
                }
                Ok(out)
            }
        }
    }

    /// Volume quadrature points of an element with geometry factors applied.
    pub fn volume_points(&self, flat: usize) -> Result<Vec<VolumePoint>> {
        let rule = self.element_rule(flat)?;
        let dim = self.dim();
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(x, &w)| {
                let (fx, j) = self.map.eval(x);
                let dj = det(&j, dim);
                if !(dj > 0.0) {
                    return Err(Error::GeometryValidity { det: dj, point: *x });
                }
                Ok(VolumePoint { param: *x, physical: fx, weight: w * dj, inv_t: inv_transpose(&j, dim, dj) })
            })
            .collect()
    }

    /// Boundary quadrature of an element: patch faces of Interior elements,
    /// and trimmed or patch faces of the tiles of Cut elements.
    pub fn boundary_rules(&self, flat: usize) -> Result<Vec<(BoundaryPart, BoundaryRule)>> {
        let n = self.quad_points;
        let e = &self.mesh.elements[flat];
        let faces = match self.label(flat) {
            ElementLabel::Exterior => return Ok(Vec::new()),
            ElementLabel::Interior => {
                let on_patch = (0..self.dim()).any(|d| e.lo[d] == 0.0 || e.hi[d] == 1.0);
                if !on_patch {
                    return Ok(Vec::new());
                }
                let t = Tile::affine_box(self.dim(), 1, &e.lo, &e.hi, e.index);
                let rp = CutElementReparam {
                    element: e.index,
                    lo: e.lo,
                    hi: e.hi,
                    tiles: vec![t],
                    subdivision_depth: 0,
                    topology: None,
                };
                let mut rp = rp;
                crate::reparam::tag_domain_faces(&mut rp.tiles, self.dim());
                boundary_faces(&rp)
            }
            ElementLabel::Cut => {
                boundary_faces(self.reparams[flat].as_ref().ok_or(Error::MissingReparam(e.index))?)
            }
        };
        faces
            .iter()
            .map(|f| {
                let part = match f.tag {
                    FaceTag::Trimmed => BoundaryPart::Trimmed,
                    FaceTag::DomainBoundary(id) => BoundaryPart::BoxFace(id),
                    FaceTag::Inner => unreachable!("boundary_faces skips inner faces"),
                };
                Ok((part, boundary_rule(f, n, &self.map)?))
            })
            .collect()
    }

    /// Physical measure of the kept domain and of the trimmed boundary.
    pub fn measures(&self) -> Result<(f64, f64)> {
        let mut vol = 0.0;
        let mut bnd = 0.0;
        for flat in self.active_elements() {
            vol += self.volume_points(flat)?.iter().map(|p| p.weight).sum::<f64>();
            for (part, rule) in self.boundary_rules(flat)? {
                if part == BoundaryPart::Trimmed {
                    bnd += rule.weights.iter().sum::<f64>();
                }
            }
        }
        Ok((vol, bnd))
    }

    /// Physical gradients of the basis at a point with `DF^{-T}`.
    pub fn physical_gradients(&self, inv_t: &Mat3, grads: &[Point], out: &mut Vec<Point>) {
        let dim = self.dim();
        out.clear();
        for g in grads {
            let mut p = ORIGIN;
            for a in 0..dim {
                for b in 0..dim {
                    p[a] += inv_t[a][b] * g[b];
                }
            }
            out.push(p);
        }
    }
}
