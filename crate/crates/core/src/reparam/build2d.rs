use super::{Attempt, Builder, CutTopology, FaceTag, Tile, TileKind};
use crate::point::{Point, ORIGIN};
use crate::reparam::lagrange::triangle_node_coords;
use crate::trimming::intersect_segment;

/// Interior roots per edge (bottom, right, top, left) and corners on the curve.
fn edge_crossings(b: &Builder, lo: &Point, hi: &Point) -> ([usize; 4], usize) {
    let c = |x: f64, y: f64| [x, y, 0.0];
    let edges = [
        (c(lo[0], lo[1]), c(hi[0], lo[1])),
        (c(hi[0], lo[1]), c(hi[0], hi[1])),
        (c(hi[0], hi[1]), c(lo[0], hi[1])),
        (c(lo[0], hi[1]), c(lo[0], lo[1])),
    ];
    let mut counts = [0; 4];
    let mut corners = 0;
    for (i, (a, e)) in edges.iter().enumerate() {
        let r = intersect_segment(b.boundary, b.map, a, e);
        counts[i] = r.roots.len();
        if r.touches_start {
            corners += 1;
        }
    }
    (counts, corners)
}

pub(crate) fn topology(b: &Builder, lo: &Point, hi: &Point) -> CutTopology {
    let (counts, corners) = edge_crossings(b, lo, hi);
    let total: usize = counts.iter().sum::<usize>() + corners;
    if total != 2 {
        return CutTopology::Other;
    }
    if corners > 0 {
        return CutTopology::Corner;
    }
    let hit: Vec<usize> = (0..4).filter(|&i| counts[i] > 0).collect();
    match hit.as_slice() {
        [_] => CutTopology::Cap,
        [a, e] if (e - a) == 2 => CutTopology::Opposite,
        _ => CutTopology::Corner,
    }
}

/// Column decomposition of the kept part of a cut box.
pub(crate) fn decompose(b: &Builder, lo: &Point, hi: &Point) -> Result<Vec<Tile>, Attempt> {
    let r = b.opts.degree;
    let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.0];
    let g = b.boundary.psi_grad(b.map, &center).1;
    let k = if g[1].abs() > g[0].abs() { 1 } else { 0 };
    let sa = 1 - k;

    // the curve must be a graph over the base direction: d psi / d x_k keeps its sign
    let n = r + 3;
    let (mut dmin, mut dmax, mut gmax) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            let x = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64,
                0.0,
            ];
            let gr = b.boundary.psi_grad(b.map, &x).1;
            dmin = dmin.min(gr[k]);
            dmax = dmax.max(gr[k]);
            gmax = gmax.max(gr[0].abs().max(gr[1].abs()));
        }
    }
    let floor = 1e-3 * gmax;
    if !(dmin > floor || dmax < -floor) {
        return Err(Attempt::Topology(format!("boundary is not a graph along axis {k}")));
    }
    let (counts, corners) = edge_crossings(b, lo, hi);
    let total = counts.iter().sum::<usize>() + corners;
    if total > 2 {
        return Err(Attempt::Topology(format!("{total} boundary crossings")));
    }

    let (s_lo, s_hi) = (lo[sa], hi[sa]);
    let (k_lo, k_hi) = (lo[k], hi[k]);
    let at = |s: f64, kv: f64| {
        let mut x = ORIGIN;
        x[sa] = s;
        x[k] = kv;
        x
    };
    let mut breaks = vec![s_lo, s_hi];
    for kv in [k_lo, k_hi] {
        let roots = intersect_segment(b.boundary, b.map, &at(s_lo, kv), &at(s_hi, kv));
        for t in roots.roots {
            let s = s_lo + t * (s_hi - s_lo);
            breaks.push((s + b.perturbation(&[s, kv])).clamp(s_lo, s_hi));
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ds = s_hi - s_lo;
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * ds);

    let mut tiles = Vec::new();
    for w in breaks.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 - s0 <= 1e-14 * ds {
            continue;
        }
        let sm = 0.5 * (s0 + s1);
        let kept_lo = b.boundary.psi(b.map, &at(sm, k_lo)) < 0.0;
        let kept_hi = b.boundary.psi(b.map, &at(sm, k_hi)) < 0.0;
        match (kept_lo, kept_hi) {
            (true, true) => {
                let (tl, th) = (at(s0, k_lo), at(s1, k_hi));
                tiles.push(Tile::affine_box(2, r, &tl, &th, b.element));
            }
            (false, false) => {}
            _ => curved_column(b, sa, k, s0, s1, kept_lo, k_lo, k_hi, &mut tiles),
        }
    }
    Ok(tiles)
}

/// Column `[s0, s1]` whose kept part is bounded by the curve on one side.
struct Strip {
    sa: usize,
    k: usize,
    s0: f64,
    s1: f64,
    kept_lo: bool,
    k_lo: f64,
    k_hi: f64,
    u_flip: bool,
    v_flip: bool,
}

impl Strip {
    fn s(&self, u: f64) -> f64 {
        let u = if self.u_flip { 1.0 - u } else { u };
        self.s0 + u * (self.s1 - self.s0)
    }

    fn point(&self, u: f64, v: f64, g: f64) -> Point {
        let v = if self.v_flip { 1.0 - v } else { v };
        let (lo, hi) = if self.kept_lo { (self.k_lo, g) } else { (g, self.k_hi) };
        let mut x = ORIGIN;
        x[self.sa] = self.s(u);
        x[self.k] = lo + v * (hi - lo);
        x
    }

    /// Reference `v` of the face lying on the curve.
    fn trimmed_v(&self) -> usize {
        let on_curve = if self.kept_lo { 1 } else { 0 };
        if self.v_flip {
            1 - on_curve
        } else {
            on_curve
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn curved_column(
    b: &Builder,
    sa: usize,
    k: usize,
    s0: f64,
    s1: f64,
    kept_lo: bool,
    k_lo: f64,
    k_hi: f64,
    tiles: &mut Vec<Tile>,
) {
    let r = b.opts.degree;
    let g = |s: f64| {
        let mut x = ORIGIN;
        x[sa] = s;
        b.column_root(&x, k, k_lo, k_hi)
    };
    let height = |s: f64| if kept_lo { g(s) - k_lo } else { k_hi - g(s) };
    let tol = 1e-12 * (k_hi - k_lo);
    let collapsed0 = height(s0) <= tol;
    let collapsed1 = height(s1) <= tol;
    let mut m = b.opts.ht_divisions;
    if m == 1 && collapsed0 && collapsed1 {
        m = 2;
    }
    for piece in 0..m {
        let p0 = s0 + (s1 - s0) * piece as f64 / m as f64;
        let p1 = if piece + 1 == m { s1 } else { s0 + (s1 - s0) * (piece + 1) as f64 / m as f64 };
        let c0 = piece == 0 && collapsed0;
        let c1 = piece + 1 == m && collapsed1;
        let u_flip = c1 && !c0;
        // (u, v) -> (x_s, x_k) has orientation +1 when s is the first axis
        let mut sign = if sa == 0 { 1.0 } else { -1.0 };
        if u_flip {
            sign = -sign;
        }
        let strip = Strip { sa, k, s0: p0, s1: p1, kept_lo, k_lo, k_hi, u_flip, v_flip: sign < 0.0 };
        let gs: Vec<f64> = (0..=r).map(|i| g(strip.s(i as f64 / r as f64))).collect();
        let tv = strip.trimmed_v();
        let tile = if c0 || c1 {
            let nodes = triangle_node_coords(r)
                .into_iter()
                .map(|(i, j)| {
                    let u = (i + j) as f64 / r as f64;
                    let v = if i + j == 0 { 0.0 } else { j as f64 / (i + j) as f64 };
                    strip.point(u, v, gs[i + j])
                })
                .collect();
            let mut faces = vec![FaceTag::Inner; 3];
            faces[if tv == 0 { 0 } else { 2 }] = FaceTag::Trimmed;
            Tile { kind: TileKind::Triangle, degree: r, nodes, faces, element: b.element }
        } else {
            let mut nodes = Vec::with_capacity((r + 1) * (r + 1));
            for j in 0..=r {
                for (i, &gi) in gs.iter().enumerate() {
                    nodes.push(strip.point(i as f64 / r as f64, j as f64 / r as f64, gi));
                }
            }
            let mut faces = vec![FaceTag::Inner; 4];
            faces[if tv == 0 { 0 } else { 2 }] = FaceTag::Trimmed;
            Tile { kind: TileKind::Quad, degree: r, nodes, faces, element: b.element }
        };
        tiles.push(tile);
    }
}
