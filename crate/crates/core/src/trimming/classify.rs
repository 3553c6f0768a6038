use super::{intersect_segment, TrimmingBoundary};
use crate::error::{Error, Result};
use crate::point::{norm, sub, Point, ORIGIN};
use crate::splines::{image_diameter, BezierMesh, GeometryMap, TensorBSplineSpace};
use rayon::prelude::*;

/// Position of an element relative to the kept region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementLabel {
    Interior,
    Cut,
    Exterior,
}

/// One label per element of a mesh, in flat element order.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementClassification {
    pub labels: Vec<ElementLabel>,
}

impl ElementClassification {
    pub fn count(&self, label: ElementLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn label(&self, flat: usize) -> ElementLabel {
        self.labels[flat]
    }
}

/// Geometric tolerance `1e-12 * diam` in physical length units.
pub fn eps_geo(map: &GeometryMap) -> f64 {
    1e-12 * map.diameter()
}

/// Classify a parametric box by sampling `psi` at its corners and on an
/// interior grid with `samples` points per direction.
pub fn classify_box(
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    lo: &Point,
    hi: &Point,
    samples: usize,
    eps: f64,
    element: [usize; 3],
) -> Result<ElementLabel> {
    if !boundary.is_trimmed() {
        return Ok(ElementLabel::Interior);
    }
    let dim = map.dim();
    let mut kept = 0usize;
    let mut out = 0usize;
    let mut near = 0usize;
    let mut min_abs = f64::INFINITY;
    let mut visit = |x: &Point| {
        let v = boundary.psi(map, x);
        min_abs = min_abs.min(v.abs());
        if v.abs() < eps {
            near += 1;
        } else if v < 0.0 {
            kept += 1;
        } else {
            out += 1;
        }
    };
    for c in 0..1usize << dim {
        let mut x = ORIGIN;
        for d in 0..dim {
            x[d] = if (c >> d) & 1 == 1 { hi[d] } else { lo[d] };
        }
        visit(&x);
    }
    let total = samples.pow(dim as u32);
    for i in 0..total {
        let mut x = ORIGIN;
        let mut rest = i;
        for d in 0..dim {
            let k = rest % samples;
            rest /= samples;
            x[d] = lo[d] + (hi[d] - lo[d]) * (k + 1) as f64 / (samples + 1) as f64;
        }
        visit(&x);
    }
    if near == (1 << dim) + total {
        return Err(Error::TangentialCut { element });
    }
    if near > 0 || (kept > 0 && out > 0) {
        return Ok(ElementLabel::Cut);
    }
    // Samples agree; a thin sliver between them would still cut the box.
    let spacing = image_diameter(map, lo, hi, dim) / (samples + 1) as f64;
    if min_abs < spacing && grid_lines_cross(boundary, map, lo, hi, samples) {
        return Ok(ElementLabel::Cut);
    }
    Ok(if kept > 0 { ElementLabel::Interior } else { ElementLabel::Exterior })
}

/// Root scan along all sample-grid lines of a box, edges included.
fn grid_lines_cross(
    boundary: &TrimmingBoundary,
    map: &GeometryMap,
    lo: &Point,
    hi: &Point,
    samples: usize,
) -> bool {
    let dim = map.dim();
    let coords = |d: usize| -> Vec<f64> {
        (0..samples + 2)
            .map(|k| lo[d] + (hi[d] - lo[d]) * k as f64 / (samples + 1) as f64)
            .collect()
    };
    let grids: Vec<Vec<f64>> = (0..dim).map(coords).collect();
    for axis in 0..dim {
        let others: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
        let n0 = grids[others[0]].len();
        let n1 = if others.len() > 1 { grids[others[1]].len() } else { 1 };
        for i in 0..n0 {
            for j in 0..n1 {
                let mut a = ORIGIN;
                a[others[0]] = grids[others[0]][i];
                if others.len() > 1 {
                    a[others[1]] = grids[others[1]][j];
                }
                let mut b = a;
                a[axis] = lo[axis];
                b[axis] = hi[axis];
                if !intersect_segment(boundary, map, &a, &b).is_empty() {
                    return true;
                }
            }
        }
    }
    false
}

fn samples_for(mesh: &BezierMesh) -> usize {
    mesh.degree + 2
}

/// Label every element of the mesh.
pub fn classify(
    mesh: &BezierMesh,
    map: &GeometryMap,
    boundary: &TrimmingBoundary,
) -> Result<ElementClassification> {
    let eps = eps_geo(map);
    let samples = samples_for(mesh);
    let labels = mesh
        .elements
        .par_iter()
        .map(|e| classify_box(boundary, map, &e.lo, &e.hi, samples, eps, e.index))
        .collect::<Result<Vec<_>>>()?;
    Ok(ElementClassification { labels })
}

/// Outcome of the slicing recursion with its instrumentation counters.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceResult {
    pub classification: ElementClassification,
    /// Bézier elements that had to be classified individually.
    pub leaf_visits: usize,
    /// Boxes visited by the recursion, leaves included.
    pub box_visits: usize,
    pub max_depth: usize,
}

/// Recursive bisection of the patch down to Bézier elements, stopping early
/// on sub-boxes that are certified to lie on one side of the boundary.
pub fn slice(
    mesh: &BezierMesh,
    space: &TensorBSplineSpace,
    map: &GeometryMap,
    boundary: &TrimmingBoundary,
) -> Result<SliceResult> {
    let mut st = SliceState {
        mesh,
        space,
        map,
        boundary,
        eps: eps_geo(map),
        labels: vec![None; mesh.len()],
        leaf_visits: 0,
        box_visits: 0,
        max_depth: 0,
    };
    let mut hi = [1usize; 3];
    hi[..mesh.dim].copy_from_slice(&mesh.counts[..mesh.dim]);
    st.recurse([0; 3], hi, 0)?;
    let labels = st.labels.into_iter().map(|l| l.expect("every element labeled")).collect();
    Ok(SliceResult {
        classification: ElementClassification { labels },
        leaf_visits: st.leaf_visits,
        box_visits: st.box_visits,
        max_depth: st.max_depth,
    })
}

struct SliceState<'a> {
    mesh: &'a BezierMesh,
    space: &'a TensorBSplineSpace,
    map: &'a GeometryMap,
    boundary: &'a TrimmingBoundary,
    eps: f64,
    labels: Vec<Option<ElementLabel>>,
    leaf_visits: usize,
    box_visits: usize,
    max_depth: usize,
}

impl SliceState<'_> {
    /// Box given by element index ranges `[lo, hi)`.
    fn recurse(&mut self, lo: [usize; 3], hi: [usize; 3], depth: usize) -> Result<()> {
        self.box_visits += 1;
        self.max_depth = self.max_depth.max(depth);
        let dim = self.mesh.dim;
        let (plo, _) = self.space.element_box(lo);
        let mut last = hi;
        for v in last.iter_mut().take(dim) {
            *v -= 1;
        }
        let (_, phi_) = self.space.element_box(last);
        let single = (0..dim).all(|d| hi[d] - lo[d] == 1);
        if single {
            self.leaf_visits += 1;
            let label = classify_box(
                self.boundary,
                self.map,
                &plo,
                &phi_,
                samples_for(self.mesh),
                self.eps,
                lo,
            )?;
            self.labels[self.mesh.flat(lo)] = Some(label);
            return Ok(());
        }
        if let Some(label) = self.uniform_label(&plo, &phi_) {
            for c in lo[2]..hi[2].max(lo[2] + 1) {
                for b in lo[1]..hi[1] {
                    for a in lo[0]..hi[0] {
                        self.labels[self.mesh.flat([a, b, c])] = Some(label);
                    }
                }
            }
            return Ok(());
        }
        // bisect the longest parametric direction at its middle knot
        let axis = (0..dim)
            .filter(|&d| hi[d] - lo[d] > 1)
            .max_by(|&a, &b| {
                let la = self.space.knot_vector(a).element_interval(hi[a] - 1).1
                    - self.space.knot_vector(a).element_interval(lo[a]).0;
                let lb = self.space.knot_vector(b).element_interval(hi[b] - 1).1
                    - self.space.knot_vector(b).element_interval(lo[b]).0;
                la.partial_cmp(&lb).unwrap().then(b.cmp(&a))
            })
            .expect("non-leaf box has a splittable direction");
        let mid = (lo[axis] + hi[axis]) / 2;
        let mut hi0 = hi;
        hi0[axis] = mid;
        let mut lo1 = lo;
        lo1[axis] = mid;
        self.recurse(lo, hi0, depth + 1)?;
        self.recurse(lo1, hi, depth + 1)
    }

    /// Sign certificate: `phi` is 1-Lipschitz, so if `|phi(F(c))|` exceeds the
    /// radius of the box image around `F(c)` the sign cannot change.
    fn uniform_label(&self, lo: &Point, hi: &Point) -> Option<ElementLabel> {
        if !self.boundary.is_trimmed() {
            return Some(ElementLabel::Interior);
        }
        let dim = self.mesh.dim;
        let mut c = ORIGIN;
        for d in 0..dim {
            c[d] = 0.5 * (lo[d] + hi[d]);
        }
        let fc = self.map.map_point(&c);
        let psi = self.boundary.keep_sign() * self.boundary.phi(&fc);
        // corners, edge midpoints and face centers of the box
        let mut radius: f64 = 0.0;
        for code in 0..3usize.pow(dim as u32) {
            let mut x = ORIGIN;
            let mut rest = code;
            for d in 0..dim {
                x[d] = lo[d] + 0.5 * (rest % 3) as f64 * (hi[d] - lo[d]);
                rest /= 3;
            }
            radius = radius.max(norm(&sub(&self.map.map_point(&x), &fc)));
        }
        if psi.abs() > 1.25 * radius {
            Some(if psi < 0.0 { ElementLabel::Interior } else { ElementLabel::Exterior })
        } else {
            None
        }
    }
}

/// Flat indices of functions whose support meets an Interior or Cut element.
pub fn active_index_set(
    space: &TensorBSplineSpace,
    classification: &ElementClassification,
) -> Vec<usize> {
    let mut active = vec![false; space.num_basis()];
    for (flat, &label) in classification.labels.iter().enumerate() {
        if label != ElementLabel::Exterior {
            for i in space.element_functions(space.element_multi(flat)) {
                active[i] = true;
            }
        }
    }
    active.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i).collect()
}
