use crate::error::{Error, Result};

const KNOT_TOL: f64 = 1e-14;

/// Open knot vector of a univariate B-spline basis.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
    /// Knot index `i` with `knots[i] < knots[i + 1]`, one per nonempty span.
    spans: Vec<usize>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots cannot hold an open vector of degree {p}",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) || knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("knots must be finite and nondecreasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        let start = knots.iter().take_while(|&&k| k == first).count();
        let end = knots.iter().rev().take_while(|&&k| k == last).count();
        if start != p + 1 || end != p + 1 {
            return Err(Error::InvalidKnots(format!(
                "end knots must be repeated exactly {} times (found {start} and {end})",
                p + 1
            )));
        }
        let mut i = start;
        while i < knots.len() - end {
            let mult = knots[i..].iter().take_while(|&&k| k == knots[i]).count();
            if mult > p.max(1) {
                return Err(Error::InvalidKnots(format!(
                    "interior knot {} has multiplicity {mult} > {p}",
                    knots[i]
                )));
            }
            i += mult;
        }
        let spans: Vec<usize> = (0..knots.len() - 1)
            .filter(|&i| knots[i + 1] - knots[i] > KNOT_TOL)
            .collect();
        if spans.is_empty() {
            return Err(Error::InvalidKnots("no nonempty knot span".into()));
        }
        Ok(Self { degree, knots, spans })
    }

    /// Uniform open knot vector on `[0, 1]` with `spans` elements.
    pub fn uniform(degree: usize, spans: usize) -> Self {
        assert!(spans >= 1, "at least one span required");
        let mut knots = vec![0.0; degree + 1];
        knots.extend((1..spans).map(|i| i as f64 / spans as f64));
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots).expect("uniform open knot vector is valid")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn num_elements(&self) -> usize {
        self.spans.len()
    }

    /// Parametric interval of element `e`.
    pub fn element_interval(&self, e: usize) -> (f64, f64) {
        let i = self.spans[e];
        (self.knots[i], self.knots[i + 1])
    }

    /// Index of the first basis function that is nonzero on element `e`.
    pub fn first_active(&self, e: usize) -> usize {
        self.spans[e] - self.degree
    }

    /// Element containing `u`, choosing the right-hand element at interior knots.
    pub fn find_element(&self, u: f64) -> usize {
        let n = self.spans.len();
        let mut lo = 0;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if u >= self.knots[self.spans[mid]] {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Elements on which basis function `i` is nonzero.
    pub fn support(&self, i: usize) -> std::ops::Range<usize> {
        let (a, b) = (self.knots[i], self.knots[i + self.degree + 1]);
        let first = self
            .spans
            .iter()
            .position(|&s| self.knots[s] >= a - KNOT_TOL)
            .unwrap_or(self.spans.len());
        let last = self
            .spans
            .iter()
            .rposition(|&s| self.knots[s + 1] <= b + KNOT_TOL)
            .map_or(first, |l| l + 1);
        first..last.max(first)
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.num_basis())
            .map(|j| {
                if p == 0 {
                    0.5 * (self.knots[j] + self.knots[j + 1])
                } else {
                    self.knots[j + 1..=j + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    /// Values and first derivatives of the `p + 1` functions active on
    /// element `e` at `u` (Cox–de Boor triangle).
    pub fn eval(&self, e: usize, u: f64, values: &mut [f64], derivs: &mut [f64]) {
        let p = self.degree;
        let span = self.spans[e];
        let k = &self.knots;
        // table[q][j]: degree-q function with index span - q + j
        let mut table = [[0.0f64; 16]; 16];
        table[0][0] = 1.0;
        for q in 1..=p {
            for j in 0..=q {
                let idx = span + j - q; // global index of N_{idx, q}
                let mut v = 0.0;
                if j >= 1 {
                    let left = table[q - 1][j - 1];
                    let den = k[idx + q] - k[idx];
                    if den > 0.0 {
                        v += (u - k[idx]) / den * left;
                    }
                }
                if j < q {
                    let right = table[q - 1][j];
                    let den = k[idx + q + 1] - k[idx + 1];
                    if den > 0.0 {
                        v += (k[idx + q + 1] - u) / den * right;
                    }
                }
                table[q][j] = v;
            }
        }
        for j in 0..=p {
            values[j] = table[p][j];
            derivs[j] = 0.0;
        }
        if p == 0 {
            return;
        }
        for j in 0..=p {
            let idx = span + j - p;
            let mut d = 0.0;
            if j >= 1 {
                let den = k[idx + p] - k[idx];
                if den > 0.0 {
                    d += table[p - 1][j - 1] / den;
                }
            }
            if j < p {
                let den = k[idx + p + 1] - k[idx + 1];
                if den > 0.0 {
                    d -= table[p - 1][j] / den;
                }
            }
            derivs[j] = p as f64 * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_open_vectors() {
        assert!(KnotVector::new(2, vec![0.0, 0.0, 0.5, 1.0, 1.0, 1.0]).is_err());
        assert!(KnotVector::new(1, vec![0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0]).is_err());
        assert!(KnotVector::new(1, vec![0.0, 0.0, 1.0, 0.5]).is_err());
        assert!(KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn linear_hats() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let (mut v, mut d) = ([0.0; 2], [0.0; 2]);
        kv.eval(0, 0.25, &mut v, &mut d);
        assert!((v[0] - 0.75).abs() < 1e-15 && (v[1] - 0.25).abs() < 1e-15);
        assert!((d[0] + 1.0).abs() < 1e-15 && (d[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn support_and_spans() {
        let kv = KnotVector::uniform(2, 8);
        assert_eq!(kv.num_basis(), 10);
        assert_eq!(kv.support(0), 0..1);
        assert_eq!(kv.support(5), 3..6);
        assert_eq!(kv.support(9), 7..8);
        assert_eq!(kv.find_element(1.0), 7);
        assert_eq!(kv.find_element(0.125), 1);
    }
}
