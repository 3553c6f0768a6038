use super::lagrange::{lagrange_1d, lagrange_triangle, triangle_node_coords, triangle_nodes};
use crate::point::{det, Mat3, Point, ORIGIN};

/// Reference shape of a tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TileKind {
    /// Unit square, `(r+1)^2` nodes, index `i + (r+1) j`.
    Quad,
    /// Unit right triangle, Silvester node layout (`j` outer, `i` inner).
    Triangle,
    /// Unit cube, `(r+1)^3` nodes, index `i + (r+1) (j + (r+1) k)`.
    Hex,
}

/// What a reference face of a tile lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceTag {
    /// Shared with another tile or with the element box; contributes nothing.
    Inner,
    /// Lies on the approximate trimming boundary.
    Trimmed,
    /// Lies on face `2 * axis + side` of the parametric patch.
    DomainBoundary(usize),
}

/// Degree-`r` Lagrange tile in the parametric domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub kind: TileKind,
    pub degree: usize,
    pub nodes: Vec<Point>,
    /// One tag per reference face.
    pub faces: Vec<FaceTag>,
    /// Element the tile belongs to.
    pub element: [usize; 3],
}

impl TileKind {
    pub fn dim(self) -> usize {
        match self {
            TileKind::Quad | TileKind::Triangle => 2,
            TileKind::Hex => 3,
        }
    }

    pub fn num_faces(self) -> usize {
        match self {
            TileKind::Quad => 4,
            TileKind::Triangle => 3,
            TileKind::Hex => 6,
        }
    }

    pub fn num_nodes(self, r: usize) -> usize {
        match self {
            TileKind::Quad => (r + 1) * (r + 1),
            TileKind::Triangle => triangle_nodes(r),
            TileKind::Hex => (r + 1).pow(3),
        }
    }

    /// Reference coordinates of the nodes in storage order.
    pub fn reference_nodes(self, r: usize) -> Vec<Point> {
        let t = |i: usize| i as f64 / r as f64;
        match self {
            TileKind::Quad => {
                let mut out = Vec::new();
                for j in 0..=r {
                    for i in 0..=r {
                        out.push([t(i), t(j), 0.0]);
                    }
                }
                out
            }
            TileKind::Triangle => {
                triangle_node_coords(r).into_iter().map(|(i, j)| [t(i), t(j), 0.0]).collect()
            }
            TileKind::Hex => {
                let mut out = Vec::new();
                for k in 0..=r {
                    for j in 0..=r {
                        for i in 0..=r {
                            out.push([t(i), t(j), t(k)]);
                        }
                    }
                }
                out
            }
        }
    }

    /// Reference point on face `f` at face coordinates `s` (one or two
    /// entries). Face parameterizations are oriented so that the natural
    /// normal points out of the reference shape.
    pub fn face_point(self, f: usize, s: &[f64]) -> Point {
        match self {
            TileKind::Quad => match f {
                0 => [s[0], 0.0, 0.0],
                1 => [1.0, s[0], 0.0],
                2 => [1.0 - s[0], 1.0, 0.0],
                _ => [0.0, 1.0 - s[0], 0.0],
            },
            TileKind::Triangle => match f {
                0 => [s[0], 0.0, 0.0],
                1 => [1.0 - s[0], s[0], 0.0],
                _ => [0.0, 1.0 - s[0], 0.0],
            },
            TileKind::Hex => {
                let (axis, side) = (f / 2, f % 2);
                let others: [usize; 2] = match axis {
                    0 => [1, 2],
                    1 => [0, 2],
                    _ => [0, 1],
                };
                // d_a x d_b along +e_axis for axes 0 and 2, -e_axis for axis 1
                let positive = axis != 1;
                let flip = positive != (side == 1);
                let (a, b) = if flip { (s[1], s[0]) } else { (s[0], s[1]) };
                let mut x = ORIGIN;
                x[axis] = side as f64;
                x[others[0]] = a;
                x[others[1]] = b;
                x
            }
        }
    }
}

impl Tile {
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    /// Parametric point and Jacobian `d x / d xi` at a reference point.
    pub fn eval(&self, xi: &Point) -> (Point, Mat3) {
        let r = self.degree;
        let dim = self.dim();
        let mut x = ORIGIN;
        let mut j = [[0.0; 3]; 3];
        match self.kind {
            TileKind::Triangle => {
                let n = triangle_nodes(r);
                let mut v = [0.0; 64];
                let mut g = [[0.0; 2]; 64];
                lagrange_triangle(r, xi[0], xi[1], &mut v[..n], &mut g[..n]);
                for (k, node) in self.nodes.iter().enumerate() {
                    for a in 0..2 {
                        x[a] += v[k] * node[a];
                        j[a][0] += g[k][0] * node[a];
                        j[a][1] += g[k][1] * node[a];
                    }
                }
            }
            TileKind::Quad | TileKind::Hex => {
                let mut v = [[0.0; 16]; 3];
                let mut d = [[0.0; 16]; 3];
                for q in 0..dim {
                    lagrange_1d(r, xi[q], &mut v[q][..=r], &mut d[q][..=r]);
                }
                let nk = if dim == 3 { r + 1 } else { 1 };
                if dim == 2 {
                    v[2][0] = 1.0;
                }
                let mut idx = 0;
                for k in 0..nk {
                    for jj in 0..=r {
                        for i in 0..=r {
                            let node = &self.nodes[idx];
                            idx += 1;
                            let w = v[0][i] * v[1][jj] * v[2][k];
                            let g = [d[0][i] * v[1][jj] * v[2][k], v[0][i] * d[1][jj] * v[2][k], v[0][i] * v[1][jj] * d[2][k]];
                            for a in 0..dim {
                                x[a] += w * node[a];
                                for b in 0..dim {
                                    j[a][b] += g[b] * node[a];
                                }
                            }
                        }
                    }
                }
            }
        }
        (x, j)
    }

    pub fn map(&self, xi: &Point) -> Point {
        self.eval(xi).0
    }

    pub fn det_jacobian(&self, xi: &Point) -> f64 {
        det(&self.eval(xi).1, self.dim())
    }

    /// Nodes of reference face `f`, ordered along the outward face
    /// parameterization (`r+1` nodes in 2D, `(r+1)^2` lexicographic in 3D).
    pub fn face_nodes(&self, f: usize) -> Vec<Point> {
        let r = self.degree;
        let t = |i: usize| i as f64 / r as f64;
        match self.kind.dim() {
            2 => (0..=r).map(|i| self.map(&self.kind.face_point(f, &[t(i)]))).collect(),
            _ => {
                let mut out = Vec::with_capacity((r + 1) * (r + 1));
                for b in 0..=r {
                    for a in 0..=r {
                        out.push(self.map(&self.kind.face_point(f, &[t(a), t(b)])));
                    }
                }
                out
            }
        }
    }

    /// Axis-aligned box `lo + (hi - lo) xi` as a tile of degree `r`.
    pub fn affine_box(dim: usize, r: usize, lo: &Point, hi: &Point, element: [usize; 3]) -> Tile {
        let kind = if dim == 2 { TileKind::Quad } else { TileKind::Hex };
        let nodes = kind
            .reference_nodes(r)
            .into_iter()
            .map(|xi| {
                let mut x = ORIGIN;
                for d in 0..dim {
                    x[d] = lo[d] + (hi[d] - lo[d]) * xi[d];
                }
                x
            })
            .collect();
        Tile { kind, degree: r, nodes, faces: vec![FaceTag::Inner; kind.num_faces()], element }
    }
}


/// A boundary face of a tile: a degree-`r` Lagrange curve (2D) or surface
/// (3D) in the parametric domain, parameterized so that `(t_y, -t_x)` or
/// `d_a x d_b` points out of the tile.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceTile {
    /// Ambient dimension (2 or 3).
    pub dim: usize,
    pub degree: usize,
    pub nodes: Vec<Point>,
    pub tag: FaceTag,
    pub element: [usize; 3],
}

impl SurfaceTile {
    /// Parametric point and tangent vectors at face coordinates `s`.
    pub fn eval(&self, s: &[f64]) -> (Point, [Point; 2]) {
        let r = self.degree;
        let mut va = [0.0; 16];
        let mut da = [0.0; 16];
        lagrange_1d(r, s[0], &mut va[..=r], &mut da[..=r]);
        let mut x = ORIGIN;
        let mut ta = ORIGIN;
        let mut tb = ORIGIN;
        if self.dim == 2 {
            for (i, node) in self.nodes.iter().enumerate() {
                for c in 0..2 {
                    x[c] += va[i] * node[c];
                    ta[c] += da[i] * node[c];
                }
            }
        } else {
            let mut vb = [0.0; 16];
            let mut db = [0.0; 16];
            lagrange_1d(r, s[1], &mut vb[..=r], &mut db[..=r]);
            for b in 0..=r {
                for a in 0..=r {
                    let node = &self.nodes[a + (r + 1) * b];
                    for c in 0..3 {
                        x[c] += va[a] * vb[b] * node[c];
                        ta[c] += da[a] * vb[b] * node[c];
                        tb[c] += va[a] * db[b] * node[c];
                    }
                }
            }
        }
        (x, [ta, tb])
    }
}
