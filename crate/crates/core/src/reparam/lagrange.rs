//! Equispaced Lagrange bases on the reference interval and triangle.

/// Values and derivatives of the degree-`r` equispaced Lagrange basis on `[0, 1]`.
pub fn lagrange_1d(r: usize, t: f64, vals: &mut [f64], ders: &mut [f64]) {
    let nodes = |i: usize| i as f64 / r as f64;
    for i in 0..=r {
        let mut v = 1.0;
        let mut d = 0.0;
        for j in 0..=r {
            if j == i {
                continue;
            }
            let denom = nodes(i) - nodes(j);
            let f = (t - nodes(j)) / denom;
            d = d * f + v / denom;
            v *= f;
        }
        vals[i] = v;
        ders[i] = d;
    }
}

/// `R_m(lambda) = prod_{l < m} (r lambda - l) / (l + 1)` and its derivative.
fn silvester(r: usize, m: usize, lambda: f64) -> (f64, f64) {
    let mut v = 1.0;
    let mut d = 0.0;
    for l in 0..m {
        let f = (r as f64 * lambda - l as f64) / (l + 1) as f64;
        let df = r as f64 / (l + 1) as f64;
        d = d * f + v * df;
        v *= f;
    }
    (v, d)
}

/// Number of nodes of the degree-`r` Lagrange triangle.
pub fn triangle_nodes(r: usize) -> usize {
    (r + 1) * (r + 2) / 2
}

/// Reference node `(i/r, j/r)` for each triangle node, `j` outer and `i` inner.
pub fn triangle_node_coords(r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(triangle_nodes(r));
    for j in 0..=r {
        for i in 0..=r - j {
            out.push((i, j));
        }
    }
    out
}

/// Triangle basis values and `(d/dxi, d/deta)` derivatives at `(xi, eta)`.
pub fn lagrange_triangle(r: usize, xi: f64, eta: f64, vals: &mut [f64], grads: &mut [[f64; 2]]) {
    let l0 = 1.0 - xi - eta;
    for (n, (i, j)) in triangle_node_coords(r).into_iter().enumerate() {
        let k = r - i - j;
        let (a, da) = silvester(r, i, xi);
        let (b, db) = silvester(r, j, eta);
        let (c, dc) = silvester(r, k, l0);
        vals[n] = a * b * c;
        grads[n] = [da * b * c - a * b * dc, a * db * c - a * b * dc];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_partition() {
        for r in 1..=6 {
            let mut v = vec![0.0; r + 1];
            let mut d = vec![0.0; r + 1];
            for k in 0..=r {
                lagrange_1d(r, k as f64 / r as f64, &mut v, &mut d);
                for (i, &vi) in v.iter().enumerate() {
                    assert!((vi - if i == k { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
            lagrange_1d(r, 0.37, &mut v, &mut d);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            assert!(d.iter().sum::<f64>().abs() < 1e-11);
        }
    }

    #[test]
    fn triangle_interpolates_nodes_and_reproduces_degree_r() {
        for r in 1..=5 {
            let n = triangle_nodes(r);
            let mut v = vec![0.0; n];
            let mut g = vec![[0.0; 2]; n];
            for (k, (i, j)) in triangle_node_coords(r).into_iter().enumerate() {
                lagrange_triangle(r, i as f64 / r as f64, j as f64 / r as f64, &mut v, &mut g);
                for (m, &vm) in v.iter().enumerate() {
                    assert!((vm - if m == k { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
            // x^a y^b with a + b = r is reproduced with its derivative
            let (x, y) = (0.21, 0.33);
            lagrange_triangle(r, x, y, &mut v, &mut g);
            let f = |p: f64, q: f64| p.powi(r as i32 - 1) * q;
            let mut s = 0.0;
            let mut sx = 0.0;
            for (k, (i, j)) in triangle_node_coords(r).into_iter().enumerate() {
                let val = f(i as f64 / r as f64, j as f64 / r as f64);
                s += v[k] * val;
                sx += g[k][0] * val;
            }
            assert!((s - f(x, y)).abs() < 1e-12);
            let fx = if r > 1 { (r as f64 - 1.0) * x.powi(r as i32 - 2) * y } else { 0.0 };
            assert!((sx - fx).abs() < 1e-11);
        }
    }
}
