use super::{GeometryMap, TensorBSplineSpace};
use crate::point::{norm, sub, Point, ORIGIN};

/// One Bézier element: a knot-span box of the parametric domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BezierElement {
    pub index: [usize; 3],
    pub lo: Point,
    pub hi: Point,
}

/// The Bézier elements of a space, with the maximum physical element diameter.
#[derive(Debug, Clone)]
pub struct BezierMesh {
    pub dim: usize,
    pub elements: Vec<BezierElement>,
    pub counts: [usize; 3],
    /// Largest polynomial degree of the underlying space.
    pub degree: usize,
    pub h: f64,
}

impl BezierMesh {
    pub fn new(space: &TensorBSplineSpace, map: &GeometryMap) -> Self {
        let dim = space.dim();
        let counts = space.elements_per_direction();
        let elements: Vec<BezierElement> = (0..space.num_elements())
            .map(|flat| {
                let index = space.element_multi(flat);
                let (lo, hi) = space.element_box(index);
                BezierElement { index, lo, hi }
            })
            .collect();
        let h = elements
            .iter()
            .map(|e| image_diameter(map, &e.lo, &e.hi, dim))
            .fold(0.0, f64::max);
        Self { dim, elements, counts, degree: space.max_degree(), h }
    }

    pub fn flat(&self, index: [usize; 3]) -> usize {
        index[0] + self.counts[0] * (index[1] + self.counts[1] * index[2])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Largest distance between images of the corners of a parametric box.
pub fn image_diameter(map: &GeometryMap, lo: &Point, hi: &Point, dim: usize) -> f64 {
    let corners: Vec<Point> = (0..1usize << dim)
        .map(|c| {
            let mut x = ORIGIN;
            for d in 0..dim {
                x[d] = if (c >> d) & 1 == 1 { hi[d] } else { lo[d] };
            }
            map.map_point(&x)
        })
        .collect();
    let mut diam: f64 = 0.0;
    for a in &corners {
        for b in &corners {
            diam = diam.max(norm(&sub(a, b)));
        }
    }
    diam
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boxes_tile_the_unit_square() {
        let space = TensorBSplineSpace::uniform(2, 2, 8);
        let map = GeometryMap::identity_box(2, [0.0; 3], [1.0, 1.0, 0.0]);
        let mesh = BezierMesh::new(&space, &map);
        let area: f64 = mesh
            .elements
            .iter()
            .map(|e| (e.hi[0] - e.lo[0]) * (e.hi[1] - e.lo[1]))
            .sum();
        assert!((area - 1.0).abs() < 1e-14);
        assert!((mesh.h - 2f64.sqrt() / 8.0).abs() < 1e-14);
        for (i, e) in mesh.elements.iter().enumerate() {
            assert_eq!(mesh.flat(e.index), i);
        }
    }
}
