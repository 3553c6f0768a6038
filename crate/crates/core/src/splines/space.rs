use super::KnotVector;
use crate::error::{Error, Result};
use crate::point::Point;

/// Nonzero basis functions at one parametric point.
#[derive(Debug, Clone, Default)]
pub struct BasisValues {
    /// Flat global indices of the nonzero functions.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Parametric gradients.
    pub gradients: Vec<Point>,
}

/// Tensor-product B-spline space on the unit parametric box.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorBSplineSpace {
    dirs: Vec<KnotVector>,
}

impl TensorBSplineSpace {
    pub fn new(dirs: Vec<KnotVector>) -> Result<Self> {
        if !(2..=3).contains(&dirs.len()) {
            return Err(Error::Dimension(format!(
                "tensor spaces must be 2D or 3D, got {} directions",
                dirs.len()
            )));
        }
        for kv in &dirs {
            let k = kv.knots();
            if k[0] != 0.0 || k[k.len() - 1] != 1.0 {
                return Err(Error::InvalidKnots("parametric box must be [0, 1]".into()));
            }
        }
        Ok(Self { dirs })
    }

    /// Uniform space with `elements` spans and degree `degree` in every direction.
    pub fn uniform(dim: usize, degree: usize, elements: usize) -> Self {
        Self::new((0..dim).map(|_| KnotVector::uniform(degree, elements)).collect())
            .expect("uniform space is valid")
    }

    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn knot_vector(&self, dir: usize) -> &KnotVector {
        &self.dirs[dir]
    }

    pub fn degree(&self, dir: usize) -> usize {
        self.dirs[dir].degree()
    }

    pub fn max_degree(&self) -> usize {
        self.dirs.iter().map(|k| k.degree()).max().unwrap_or(0)
    }

    pub fn dim_per_direction(&self) -> [usize; 3] {
        let mut n = [1; 3];
        for (d, kv) in self.dirs.iter().enumerate() {
            n[d] = kv.num_basis();
        }
        n
    }

    pub fn elements_per_direction(&self) -> [usize; 3] {
        let mut n = [1; 3];
        for (d, kv) in self.dirs.iter().enumerate() {
            n[d] = kv.num_elements();
        }
        n
    }

    pub fn num_basis(&self) -> usize {
        self.dim_per_direction().iter().product()
    }

    pub fn num_elements(&self) -> usize {
        self.elements_per_direction().iter().product()
    }

    /// Number of functions active on any element.
    pub fn local_dim(&self) -> usize {
        self.dirs.iter().map(|k| k.degree() + 1).product()
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        let n = self.dim_per_direction();
        multi[0] + n[0] * (multi[1] + n[1] * multi[2])
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.dim_per_direction();
        [flat % n[0], (flat / n[0]) % n[1], flat / (n[0] * n[1])]
    }

    pub fn element_flat(&self, e: [usize; 3]) -> usize {
        let n = self.elements_per_direction();
        e[0] + n[0] * (e[1] + n[1] * e[2])
    }

    pub fn element_multi(&self, flat: usize) -> [usize; 3] {
        let n = self.elements_per_direction();
        [flat % n[0], (flat / n[0]) % n[1], flat / (n[0] * n[1])]
    }

    /// Parametric box `(lo, hi)` of an element.
    pub fn element_box(&self, e: [usize; 3]) -> (Point, Point) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for (d, kv) in self.dirs.iter().enumerate() {
            let (a, b) = kv.element_interval(e[d]);
            lo[d] = a;
            hi[d] = b;
        }
        (lo, hi)
    }

    /// Element containing a parametric point.
    pub fn find_element(&self, x: &Point) -> [usize; 3] {
        let mut e = [0; 3];
        for (d, kv) in self.dirs.iter().enumerate() {
            e[d] = kv.find_element(x[d]);
        }
        e
    }

    /// Nonzero basis functions of `element` at `point`.
    pub fn eval_basis(&self, element: [usize; 3], point: &Point) -> Result<BasisValues> {
        let (lo, hi) = self.element_box(element);
        for d in 0..self.dim() {
            let tol = 1e-12 * (hi[d] - lo[d]).max(1.0);
            if point[d] < lo[d] - tol || point[d] > hi[d] + tol {
                return Err(Error::PointOutsideElement { element, point: *point });
            }
        }
        let mut out = BasisValues::default();
        self.eval_into(element, point, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a reusable buffer.
    pub fn eval_into(&self, element: [usize; 3], point: &Point, out: &mut BasisValues) {
        let dim = self.dim();
        let mut vals = [[0.0; 16]; 3];
        let mut ders = [[0.0; 16]; 3];
        let mut first = [0usize; 3];
        let mut counts = [1usize; 3];
        for d in 0..dim {
            let kv = &self.dirs[d];
            let p = kv.degree();
            kv.eval(element[d], point[d], &mut vals[d][..=p], &mut ders[d][..=p]);
            first[d] = kv.first_active(element[d]);
            counts[d] = p + 1;
        }
        if dim == 2 {
            vals[2][0] = 1.0;
            ders[2][0] = 0.0;
        }
        let n = self.dim_per_direction();
        out.indices.clear();
        out.values.clear();
        out.gradients.clear();
        for c in 0..counts[2] {
            for b in 0..counts[1] {
                for a in 0..counts[0] {
                    let idx =
                        (first[0] + a) + n[0] * ((first[1] + b) + n[1] * (first[2] + c));
                    let (v0, v1, v2) = (vals[0][a], vals[1][b], vals[2][c]);
                    let (d0, d1, d2) = (ders[0][a], ders[1][b], ders[2][c]);
                    out.indices.push(idx);
                    out.values.push(v0 * v1 * v2);
                    out.gradients.push([d0 * v1 * v2, v0 * d1 * v2, v0 * v1 * d2]);
                }
            }
        }
    }

    /// Elements (multi-indices) on which function `index` is nonzero.
    pub fn active_elements_of_function(&self, index: usize) -> Vec<[usize; 3]> {
        let m = self.multi_index(index);
        let dim = self.dim();
        let ranges: Vec<std::ops::Range<usize>> =
            (0..3).map(|d| if d < dim { self.dirs[d].support(m[d]) } else { 0..1 }).collect();
        let mut out = Vec::new();
        for c in ranges[2].clone() {
            for b in ranges[1].clone() {
                for a in ranges[0].clone() {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    /// Flat indices of the functions active on `element`.
    pub fn element_functions(&self, element: [usize; 3]) -> Vec<usize> {
        let dim = self.dim();
        let n = self.dim_per_direction();
        let mut first = [0; 3];
        let mut counts = [1; 3];
        for d in 0..dim {
            first[d] = self.dirs[d].first_active(element[d]);
            counts[d] = self.dirs[d].degree() + 1;
        }
        let mut out = Vec::with_capacity(counts.iter().product());
        for c in 0..counts[2] {
            for b in 0..counts[1] {
                for a in 0..counts[0] {
                    out.push((first[0] + a) + n[0] * ((first[1] + b) + n[1] * (first[2] + c)));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_values_at_interior_knot() {
        // Independent recursive evaluator: textbook Cox–de Boor on the full index range.
        fn naive(i: usize, p: usize, k: &[f64], u: f64) -> f64 {
            if p == 0 {
                let last = k[k.len() - 1];
                return if (k[i] <= u && u < k[i + 1]) || (u == last && k[i] < u && k[i + 1] == last) {
                    1.0
                } else {
                    0.0
                };
            }
            let mut v = 0.0;
            if k[i + p] > k[i] {
                v += (u - k[i]) / (k[i + p] - k[i]) * naive(i, p - 1, k, u);
            }
            if k[i + p + 1] > k[i + 1] {
                v += (k[i + p + 1] - u) / (k[i + p + 1] - k[i + 1]) * naive(i + 1, p - 1, k, u);
            }
            v
        }
        let knots = vec![0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0];
        let kv = KnotVector::new(2, knots.clone()).unwrap();
        let (mut v, mut d) = ([0.0; 3], [0.0; 3]);
        // right-hand element at the knot: functions 1, 2, 3
        kv.eval(1, 0.5, &mut v, &mut d);
        let oracle: Vec<f64> = (1..4).map(|i| naive(i, 2, &knots, 0.5)).collect();
        for j in 0..3 {
            assert!((v[j] - oracle[j]).abs() < 1e-15);
        }
        assert!((v[0] - 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15 && v[2].abs() < 1e-15);
        // left element sees functions 0, 1, 2 with the same nonzero pair
        kv.eval(0, 0.5, &mut v, &mut d);
        assert!(v[0].abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15 && (v[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_outside_points() {
        let s = TensorBSplineSpace::uniform(2, 2, 4);
        assert!(s.eval_basis([0, 0, 0], &[0.5, 0.1, 0.0]).is_err());
        let b = s.eval_basis([1, 0, 0], &[0.3, 0.1, 0.0]).unwrap();
        assert_eq!(b.values.len(), 9);
    }

    #[test]
    fn supports() {
        let s1 = TensorBSplineSpace::uniform(2, 2, 8);
        let mid = s1.flat_index([4, 4, 0]);
        assert_eq!(s1.active_elements_of_function(mid).len(), 9);
        assert_eq!(s1.active_elements_of_function(0), vec![[0, 0, 0]]);
        let s = TensorBSplineSpace::new(vec![KnotVector::uniform(2, 8), KnotVector::uniform(3, 8)])
            .unwrap();
        let f = s.flat_index([5, 5, 0]);
        let els = s.active_elements_of_function(f);
        assert_eq!(els.len(), 12);
        assert!(els.contains(&[3, 2, 0]) && els.contains(&[5, 5, 0]));
    }
}
