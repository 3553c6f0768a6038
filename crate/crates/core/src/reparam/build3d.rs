use super::{Attempt, Builder, FaceTag, Tile, TileKind};
use crate::point::{Point, ORIGIN};
use crate::trimming::intersect_segment;

/// One side of a cell in the base rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Const(f64),
    /// Zero curve of `psi` on the base face `x_k = z`.
    Curve(f64),
}

/// Column decomposition of the kept part of a cut box. The vertical axis `k`
/// carries the surface graph `G(s, t)`; the base rectangle is split along
/// `s` at points where the trace curves of the bottom and top faces meet its
/// `t`-edges, and along `t` by those trace curves.
pub(crate) fn decompose(b: &Builder, lo: &Point, hi: &Point) -> Result<Vec<Tile>, Attempt> {
    let r = b.opts.degree;
    let mut center = ORIGIN;
    for d in 0..3 {
        center[d] = 0.5 * (lo[d] + hi[d]);
    }
    let g = b.boundary.psi_grad(b.map, &center).1;
    let k = argmax(&[0, 1, 2], &g);
    let rest: Vec<usize> = (0..3).filter(|&d| d != k).collect();
    let ta = argmax(&rest, &g);
    let sa = rest[0] + rest[1] - ta;

    let n = r + 3;
    let frac = |i: usize| i as f64 / (n - 1) as f64;
    let (mut dmin, mut dmax, mut gmax) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for l in 0..n {
        for j in 0..n {
            for i in 0..n {
                let x = [
                    lo[0] + (hi[0] - lo[0]) * frac(i),
                    lo[1] + (hi[1] - lo[1]) * frac(j),
                    lo[2] + (hi[2] - lo[2]) * frac(l),
                ];
                let gr = b.boundary.psi_grad(b.map, &x).1;
                dmin = dmin.min(gr[k]);
                dmax = dmax.max(gr[k]);
                gmax = gmax.max(gr[0].abs().max(gr[1].abs()).max(gr[2].abs()));
            }
        }
    }
    let floor = 1e-3 * gmax;
    if !(dmin > floor || dmax < -floor) {
        return Err(Attempt::Topology(format!("boundary is not a graph along axis {k}")));
    }

    let at = |s: f64, t: f64, z: f64| {
        let mut x = ORIGIN;
        x[sa] = s;
        x[ta] = t;
        x[k] = z;
        x
    };
    let (s_lo, s_hi, t_lo, t_hi, z_lo, z_hi) = (lo[sa], hi[sa], lo[ta], hi[ta], lo[k], hi[k]);

    // trace curves on the bottom and top faces must be graphs over s
    for z in [z_lo, z_hi] {
        for i in 0..n {
            let s = s_lo + (s_hi - s_lo) * frac(i);
            let mut changes = 0;
            let mut last = 0.0f64;
            for j in 0..n {
                let v = b.boundary.psi(b.map, &at(s, t_lo + (t_hi - t_lo) * frac(j), z));
                if v != 0.0 {
                    if last != 0.0 && v.signum() != last.signum() {
                        changes += 1;
                    }
                    last = v;
                }
            }
            if changes > 1 {
                return Err(Attempt::Topology(format!("face trace is not a graph along axis {ta}")));
            }
        }
    }

    let mut breaks = vec![s_lo, s_hi];
    for z in [z_lo, z_hi] {
        for t in [t_lo, t_hi] {
            let roots = intersect_segment(b.boundary, b.map, &at(s_lo, t, z), &at(s_hi, t, z));
            for u in roots.roots {
                let s = s_lo + u * (s_hi - s_lo);
                breaks.push((s + b.perturbation(&[s, t, z])).clamp(s_lo, s_hi));
            }
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ds = s_hi - s_lo;
    let dt = t_hi - t_lo;
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * ds);

    // root of the trace on face z at abscissa s
    let trace = |s: f64, z: f64| b.column_root(&at(s, 0.0, z), ta, t_lo, t_hi);
    let side_value = |side: Side, s: f64| match side {
        Side::Const(v) => v,
        Side::Curve(z) => trace(s, z),
    };

    let mut tiles = Vec::new();
    for w in breaks.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s1 - s0 <= 1e-14 * ds {
            continue;
        }
        let sm = 0.5 * (s0 + s1);
        let mut sides = vec![(t_lo, Side::Const(t_lo)), (t_hi, Side::Const(t_hi))];
        for z in [z_lo, z_hi] {
            let a = b.boundary.psi(b.map, &at(sm, t_lo, z));
            let e = b.boundary.psi(b.map, &at(sm, t_hi, z));
            if (a < 0.0) != (e < 0.0) {
                sides.push((trace(sm, z), Side::Curve(z)));
            }
        }
        sides.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for pair in sides.windows(2) {
            let ((ta_m, side_a), (tb_m, side_b)) = (pair[0], pair[1]);
            if tb_m - ta_m <= 1e-14 * dt {
                continue;
            }
            let tm = 0.5 * (ta_m + tb_m);
            let kept_lo = b.boundary.psi(b.map, &at(sm, tm, z_lo)) < 0.0;
            let kept_hi = b.boundary.psi(b.map, &at(sm, tm, z_hi)) < 0.0;
            if !kept_lo && !kept_hi {
                continue;
            }
            let split = kept_lo != kept_hi;
            let cell = Cell { sa, ta, k, s0, s1, z_lo, z_hi, kept_lo, split };
            let a_vals: Vec<f64> = (0..=r).map(|i| side_value(side_a, cell.s(i, r))).collect();
            let b_vals: Vec<f64> = (0..=r).map(|i| side_value(side_b, cell.s(i, r))).collect();
            tiles.push(cell.tile(b, r, &a_vals, &b_vals));
        }
    }
    Ok(tiles)
}

fn argmax(axes: &[usize], g: &Point) -> usize {
    let mut best = axes[0];
    for &a in axes {
        if g[a].abs() > g[best].abs() {
            best = a;
        }
    }
    best
}

struct Cell {
    sa: usize,
    ta: usize,
    k: usize,
    s0: f64,
    s1: f64,
    z_lo: f64,
    z_hi: f64,
    kept_lo: bool,
    split: bool,
}

impl Cell {
    fn s(&self, i: usize, r: usize) -> f64 {
        self.s0 + (self.s1 - self.s0) * i as f64 / r as f64
    }

    fn tile(&self, b: &Builder, r: usize, a_vals: &[f64], b_vals: &[f64]) -> Tile {
        // orientation of (u, v, w) -> (x_s, x_t, x_k) is the sign of the axis permutation
        let perm = [self.sa, self.ta, self.k];
        let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        let w_flip = inversions % 2 == 1;
        let mut nodes = vec![ORIGIN; (r + 1).pow(3)];
        for j in 0..=r {
            let v = j as f64 / r as f64;
            for i in 0..=r {
                let s = self.s(i, r);
                let t = a_vals[i] + v * (b_vals[i] - a_vals[i]).max(0.0);
                let (zl, zh) = if self.split {
                    let mut base = ORIGIN;
                    base[self.sa] = s;
                    base[self.ta] = t;
                    let gz = b.column_root(&base, self.k, self.z_lo, self.z_hi);
                    if self.kept_lo {
                        (self.z_lo, gz)
                    } else {
                        (gz, self.z_hi)
                    }
                } else {
                    (self.z_lo, self.z_hi)
                };
                for l in 0..=r {
                    let w = l as f64 / r as f64;
                    let w = if w_flip { 1.0 - w } else { w };
                    let mut x = ORIGIN;
                    x[self.sa] = s;
                    x[self.ta] = t;
                    x[self.k] = zl + w * (zh - zl);
                    nodes[i + (r + 1) * (j + (r + 1) * l)] = x;
                }
            }
        }
        let mut faces = vec![FaceTag::Inner; 6];
        if self.split {
            let on_curve = if self.kept_lo { 1 } else { 0 };
            let w_ref = if w_flip { 1 - on_curve } else { on_curve };
            faces[4 + w_ref] = FaceTag::Trimmed;
        }
        Tile { kind: TileKind::Hex, degree: r, nodes, faces, element: b.element }
    }
}
