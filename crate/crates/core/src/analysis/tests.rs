use super::*;
use crate::assembly::assemble_problem;
use crate::point::Point;
use crate::solver::{condition_number, diagonal_scaling, ConditionMethod, ConditionMode};
use std::sync::Arc;

#[test]
fn greville_interpolant_of_a_linear_field_has_no_error() {
    let mut case = case_poisson_2d(false);
    let u = |x: &Point| 0.25 + 2.0 * x[0] - 0.5 * x[1];
    case.exact_u = Arc::new(move |x| [u(x), 0.0, 0.0]);
    case.exact_grad = Arc::new(|_| [[2.0, -0.5, 0.0], [0.0; 3], [0.0; 3]]);
    let disc = discretize(&case, 8, &RunSettings::new(3, 3)).unwrap();
    let g: Vec<Vec<f64>> = (0..2).map(|d| disc.space.knot_vector(d).greville()).collect();
    let coeffs: Vec<f64> = disc
        .active
        .iter()
        .map(|&f| {
            let m = disc.space.multi_index(f);
            u(&disc.map.map_point(&[g[0][m[0]], g[1][m[1]], 0.0]))
        })
        .collect();
    let e = error_norms(&disc, &coeffs, &case).unwrap();
    assert!(e.h1 < 1e-11 && e.l2 < 1e-11, "{e:?}");
    // split contributions add up
    let shifted: Vec<f64> = coeffs.iter().map(|c| c + 1e-3).collect();
    let e = error_norms(&disc, &shifted, &case).unwrap();
    assert!((e.l2 * e.l2 - e.l2_cut * e.l2_cut - e.l2_int * e.l2_int).abs() < 1e-15);
    assert!((e.h1 * e.h1 - e.h1_cut * e.h1_cut - e.h1_int * e.h1_int).abs() < 1e-15);
    // a constant error of 1e-3 over the disc
    assert!((e.l2 - 1e-3 * std::f64::consts::PI.sqrt()).abs() < 1e-7);
}

#[test]
fn cut_cell_volume_matches_monte_carlo() {
    let case = case_poisson_3d();
    // the cell [3/4, 1] x [0, 1/4]^2 lies under the graph x = sqrt(1 - y^2 - z^2)
    let g = crate::quadrature::gauss_legendre(20, 2).unwrap();
    let exact: f64 = g
        .points
        .iter()
        .zip(&g.weights)
        .map(|(p, w)| {
            let (y, z) = (0.25 * p[0], 0.25 * p[1]);
            w / 16.0 * ((1.0 - y * y - z * z).sqrt() - 0.75)
        })
        .sum();
    let mut last = f64::INFINITY;
    for r in 1..=4 {
        let disc = discretize(&case, 4, &RunSettings::new(r, r)).unwrap();
        let flat = disc.space.element_flat([3, 0, 0]);
        let tiles: f64 = disc.volume_points(flat).unwrap().iter().map(|q| q.weight).sum();
        let err = (tiles - exact).abs();
        assert!(err < last, "r = {r}: {err:e}");
        last = err;
        if r == 4 {
            let (lo, hi) = disc.space.element_box([3, 0, 0]);
            let m = oracle_measure(&case.boundary, &disc.map, &lo, &hi, 10_000_000, 17);
            assert!((tiles - m.value).abs() < 3.0 * m.std_error, "{tiles} vs {m:?}");
            assert!((exact - m.value).abs() < 3.0 * m.std_error);
        }
    }
}

#[test]
fn scaled_diagonal_is_one() {
    let case = case_poisson_2d(false);
    let disc = discretize(&case, 16, &RunSettings::new(3, 3)).unwrap();
    let sys = assemble_problem(&disc, &case.problem).unwrap();
    let d = diagonal_scaling(&sys.matrix, Some(&sys.owners)).unwrap();
    for v in sys.matrix.scale_symmetric(&d).diagonal() {
        assert!((v - 1.0).abs() < 1e-14);
    }
}

#[test]
fn scaling_never_worsens_conditioning_on_trimmed_systems() {
    for (kind, n) in [(CaseKind::Poisson2d, 16), (CaseKind::Plate, 8), (CaseKind::Poisson3d, 4)] {
        let case = kind.build();
        let disc = discretize(&case, n, &RunSettings::new(2, 2)).unwrap();
        let sys = assemble_problem(&disc, &case.problem).unwrap();
        let c = sys.constraint.as_ref().map(|c| c.row.as_slice());
        let raw = condition_number(&sys.matrix, ConditionMode::Raw, c, ConditionMethod::Auto).unwrap();
        let scaled = condition_number(&sys.matrix, ConditionMode::Scaled, c, ConditionMethod::Auto).unwrap();
        assert!(scaled < raw, "{kind}: {scaled} vs {raw}");
        // every active function contributes one unknown per component
        assert_eq!(sys.len() + sys.dirichlet.len(), disc.active.len() * case.components());
    }
}

#[test]
fn iteration_counts_grow_like_inverse_h() {
    let recs = convergence_study(CaseKind::Poisson2d, &[RunSettings::new(2, 2)], &[16, 32, 64, 128]);
    let pts: Vec<(f64, f64)> = recs[0].rows.iter().map(|r| (r.h, r.iters as f64)).collect();
    let slope = -fit_slope(&pts).unwrap();
    assert!((0.5..=1.5).contains(&slope), "{slope}");
}

#[test]
fn circle_study_rates_and_reproducibility() {
    let mut s = RunSettings::new(2, 2);
    s.condition = true;
    let recs = convergence_study(CaseKind::Poisson2d, &[s], &[8, 16, 32]);
    let rec = &recs[0];
    assert!(rec.rows.iter().all(|r| r.failure.is_none() && r.converged));
    let l2 = rec.slope(Column::L2).unwrap();
    assert!(l2 > 2.5, "{l2}");
    for r in &rec.rows {
        assert!(r.cond_scaled < r.cond_raw);
    }
    let mut a = Vec::new();
    write_csv(&recs, &mut a).unwrap();
    let mut b = Vec::new();
    write_csv(&convergence_study(CaseKind::Poisson2d, &[s], &[8, 16, 32]), &mut b).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(text.lines().count(), 4);
    assert!(rate_summary(&recs).contains("l2"));
}

#[test]
fn slope_fit_and_precision_floor() {
    let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 3.0 * h.powi(4))).collect();
    assert!((fit_slope(&pts).unwrap() - 4.0).abs() < 1e-12);
    assert!(fit_slope(&pts[..1]).is_none());
    let mut s = RunSettings::new(2, 2);
    s.geo_precision = 1e-8;
    let row = |h: f64, l2: f64| RunRow {
        case: "x".into(),
        p: 2,
        r: 2,
        ht: 1,
        elements: 1,
        h,
        dofs: 0,
        l2,
        h1: l2,
        h1_cut: l2,
        h1_int: l2,
        area_err: l2,
        bnd_err: l2,
        cond_raw: 1.0,
        cond_scaled: 1.0,
        iters: 1,
        converged: true,
        secs: 0.0,
        failure: None,
    };
    // the two finest values sit on the floor and are ignored
    let rec = ConvergenceRecord {
        settings: s,
        rows: vec![row(0.4, 0.4f64.powi(3)), row(0.2, 0.2f64.powi(3)), row(0.1, 0.1f64.powi(3)), row(0.05, 5e-8), row(0.025, 4e-8)],
    };
    assert!((rec.slope(Column::L2).unwrap() - 3.0).abs() < 1e-12);
}
