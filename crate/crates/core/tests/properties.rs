use proptest::prelude::*;
use std::f64::consts::PI;
use trimmed_iga::analysis::fit_slope;
use trimmed_iga::assembly::Discretization;
use trimmed_iga::quadrature::gauss_legendre;
use trimmed_iga::reparam::{validate, ReparamOptions};
use trimmed_iga::sparse::SparseMatrix;
use trimmed_iga::trimming::{KeepSide, TrimmingBoundary};
use trimmed_iga::{GeometryMap, KnotVector, TensorBSplineSpace};

fn knots(p: usize, inner: &[f64]) -> KnotVector {
    let mut inner: Vec<f64> = inner.to_vec();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut k = vec![0.0; p + 1];
    k.extend(inner);
    k.extend(vec![1.0; p + 1]);
    KnotVector::new(p, k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_of_unity(
        p in 1usize..=6,
        q in 1usize..=6,
        ix in prop::collection::vec(0.01f64..0.99, 0..6),
        iy in prop::collection::vec(0.01f64..0.99, 0..6),
        x in 0.0f64..=1.0,
        y in 0.0f64..=1.0,
    ) {
        let s = TensorBSplineSpace::new(vec![knots(p, &ix), knots(q, &iy)]).unwrap();
        let pt = [x, y, 0.0];
        let b = s.eval_basis(s.find_element(&pt), &pt).unwrap();
        prop_assert!((b.values.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        prop_assert!(b.values.iter().all(|&v| v >= -1e-15));
        let scale = b.gradients.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for d in 0..2 {
            let g: f64 = b.gradients.iter().map(|g| g[d]).sum();
            prop_assert!(g.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn gauss_rules_integrate_polynomials_exactly(
        n in 1usize..=10,
        coeffs in prop::collection::vec(-1.0f64..1.0, 20),
    ) {
        let g = gauss_legendre(n, 1).unwrap();
        let deg = 2 * n - 1;
        let c = &coeffs[..=deg.min(19)];
        let exact: f64 = c.iter().enumerate().map(|(k, a)| a / (k + 1) as f64).sum();
        let q: f64 = g
            .points
            .iter()
            .zip(&g.weights)
            .map(|(x, w)| w * c.iter().rev().fold(0.0, |acc, a| acc * x[0] + a))
            .sum();
        prop_assert!((q - exact).abs() < 1e-13);
    }

    #[test]
    fn tensor_weights_are_positive_and_sum_to_one(n in 1usize..=10, d in 1usize..=3) {
        let g = gauss_legendre(n, d).unwrap();
        prop_assert_eq!(g.weights.len(), n.pow(d as u32));
        prop_assert!(g.weights.iter().all(|&w| w > 0.0));
        prop_assert!((g.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_triplets_give_symmetric_matrices(
        entries in prop::collection::vec((0usize..12, 0usize..12, -5.0f64..5.0), 1..60),
        x in prop::collection::vec(-1.0f64..1.0, 12),
    ) {
        let mut t = Vec::new();
        for &(i, j, v) in &entries {
            t.push((i, j, v));
            t.push((j, i, v));
        }
        let a = SparseMatrix::from_triplets(12, t);
        prop_assert_eq!(a.asymmetry().0, 0.0);
        let dense = a.to_dense();
        let y = a.mul_vec(&x);
        for i in 0..12 {
            let yi: f64 = (0..12).map(|j| dense[(i, j)] * x[j]).sum();
            prop_assert!((yi - y[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_slope_recovers_power_laws(k in -3.0f64..6.0, c in 1e-6f64..1e3, levels in 2usize..7) {
        let pts: Vec<(f64, f64)> = (0..levels).map(|i| {
            let h = 0.5f64.powi(i as i32);
            (h, c * h.powf(k))
        }).collect();
        prop_assert!((fit_slope(&pts).unwrap() - k).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_circles_give_valid_tiles_and_accurate_areas(
        cx in 0.35f64..0.65,
        cy in 0.35f64..0.65,
        radius in 0.12f64..0.3,
        r in 1usize..=3,
    ) {
        let map = GeometryMap::identity_box(2, [0.0; 3], [1.0, 1.0, 0.0]);
        let boundary = TrimmingBoundary::circle([cx, cy, 0.0], radius, KeepSide::Negative);
        let space = TensorBSplineSpace::uniform(2, 3, 16);
        let opts = ReparamOptions::new(r);
        let disc = Discretization::new(space, map.clone(), boundary.clone(), &opts).unwrap();
        for rp in disc.reparams.iter().flatten() {
            let v = validate(rp, &boundary, &map, opts.quad_points);
            prop_assert!(v.contained && v.min_det_j > 0.0, "{v:?}");
            prop_assert!(v.max_phi_on_gamma_h < 1e-12);
        }
        let (area, perimeter) = disc.measures().unwrap();
        let exact = PI * radius * radius;
        // the boundary interpolation error decays like (h / R)^(r + 1)
        let tol = 0.2 * (1.0 / 16.0 / radius).powi(r as i32 + 1);
        prop_assert!((area - exact).abs() / exact < tol, "area {area} vs {exact}");
        prop_assert!((perimeter - 2.0 * PI * radius).abs() / (2.0 * PI * radius) < tol);
    }
}
