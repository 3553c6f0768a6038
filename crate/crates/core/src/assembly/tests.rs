use super::*;
use crate::error::Error;
use crate::point::{Point, ORIGIN};
use crate::reparam::ReparamOptions;
use crate::solver::solve;
use crate::splines::{BasisValues, GeometryMap, TensorBSplineSpace};
use crate::trimming::{KeepSide, TrimmingBoundary};
use rand::{RngExt, SeedableRng};
use std::sync::Arc;

fn untrimmed(p: usize, n: usize, lo: Point, hi: Point) -> Discretization {
    let space = TensorBSplineSpace::uniform(2, p, n);
    let mut opts = ReparamOptions::new(p);
    opts.quad_points = p + 1;
    Discretization::new(space, GeometryMap::identity_box(2, lo, hi), TrimmingBoundary::none(), &opts).unwrap()
}

fn circle_case(p: usize, r: usize, n: usize, quad_points: usize) -> Discretization {
    let half = 1.0 / 0.7;
    let space = TensorBSplineSpace::uniform(2, p, n);
    let map = GeometryMap::identity_box(2, [-half, -half, 0.0], [half, half, 0.0]);
    let mut opts = ReparamOptions::new(r);
    opts.quad_points = quad_points;
    Discretization::new(space, map, TrimmingBoundary::circle(ORIGIN, 1.0, KeepSide::Negative), &opts).unwrap()
}

/// Value of the discrete field with full coefficients `x` (component `c`).
fn eval(disc: &Discretization, x: &[f64], k: usize, c: usize, param: &Point) -> f64 {
    let mut bv = BasisValues::default();
    disc.space.eval_into(disc.space.find_element(param), param, &mut bv);
    bv.indices.iter().zip(&bv.values).map(|(&f, &v)| v * x[disc.local_of[f] * k + c]).sum()
}

fn field(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(move |x| [f(x), 0.0, 0.0])
}

#[test]
fn bilinear_element_matrix() {
    let disc = untrimmed(1, 1, [0.0; 3], [1.0, 1.0, 0.0]);
    let sys = assemble(&disc, &ProblemDefinition::poisson()).unwrap();
    let a = sys.matrix.to_dense();
    // nodes (0,0), (1,0), (0,1), (1,1)
    let expected = [
        [4.0, -1.0, -1.0, -2.0],
        [-1.0, 4.0, -2.0, -1.0],
        [-1.0, -2.0, 4.0, -1.0],
        [-2.0, -1.0, -1.0, 4.0],
    ];
    for i in 0..4 {
        let mut sum = 0.0;
        for j in 0..4 {
            assert!((a[(i, j)] - expected[i][j] / 6.0).abs() < 1e-15);
            sum += a[(i, j)];
        }
        assert!(sum.abs() < 1e-15);
    }
}

#[test]
fn dirichlet_linear_field_is_reproduced() {
    let (lo, hi) = ([0.0, -1.0, 0.0], [2.0, 1.0, 0.0]);
    let disc = untrimmed(2, 4, lo, hi);
    let mut problem = ProblemDefinition::poisson();
    let u = |x: &Point| 1.0 + 0.5 * x[0] - 2.0 * x[1];
    for face in 0..4 {
        problem.dirichlet.push(DirichletCondition { face, component: None, value: field(u) });
    }
    let sys = assemble_problem(&disc, &problem).unwrap();
    assert!(sys.len() < sys.n_full);
    let x = solve(&sys).unwrap().solution;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let s = [rng.random::<f64>(), rng.random::<f64>(), 0.0];
        let phys = disc.map.map_point(&s);
        assert!((eval(&disc, &x, 1, 0, &s) - u(&phys)).abs() < 1e-10);
    }
}

#[test]
fn trimmed_matrix_is_symmetric_and_semidefinite() {
    let disc = circle_case(2, 2, 8, 3);
    let sys = assemble(&disc, &ProblemDefinition::poisson()).unwrap();
    assert_eq!(sys.len(), disc.active.len());
    let (diff, max) = sys.matrix.asymmetry();
    assert!(diff <= 1e-12 * max);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let x: Vec<f64> = (0..sys.len()).map(|_| rng.random::<f64>() - 0.5).collect();
        let ax = sys.matrix.mul_vec(&x);
        let q: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let n2: f64 = x.iter().map(|v| v * v).sum();
        assert!(q >= -1e-10 * n2);
    }
    // constants span the kernel
    let ones = vec![1.0; sys.len()];
    let r = sys.matrix.mul_vec(&ones);
    assert!(r.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn neumann_patch_test_with_mean_constraint() {
    let u = |x: &Point| 0.3 - 1.5 * x[0] + 0.75 * x[1];
    let grad = [-1.5, 0.75, 0.0];
    let mut problem = ProblemDefinition::poisson();
    problem.neumann = Some(Arc::new(move |_, n, _| [grad[0] * n[0] + grad[1] * n[1], 0.0, 0.0]));
    problem.mean_constraint = Some(MeanConstraint::IntegralOf(field(u)));
    // untrimmed square, then the trimmed circle where n is the discrete normal;
    // curved tiles raise the integrand degree, hence the richer rule there
    for disc in [untrimmed(2, 4, [0.0; 3], [1.0, 1.0, 0.0]), circle_case(2, 2, 8, 10)] {
        let sys = assemble_problem(&disc, &problem).unwrap();
        let rep = solve(&sys).unwrap();
        assert!(rep.converged);
        for e in disc.active_elements() {
            for qp in disc.volume_points(e).unwrap() {
                let v = eval(&disc, &rep.solution, 1, 0, &qp.param);
                assert!((v - u(&qp.physical)).abs() < 1e-9, "{v} vs {}", u(&qp.physical));
            }
        }
    }
}

#[test]
fn constant_target_is_recovered() {
    let disc = circle_case(3, 3, 8, 4);
    let mut problem = ProblemDefinition::poisson();
    problem.mean_constraint = Some(MeanConstraint::Target(2.0));
    let sys = assemble_problem(&disc, &problem).unwrap();
    let x = solve(&sys).unwrap().solution;
    let (area, _) = disc.measures().unwrap();
    for e in disc.active_elements() {
        for qp in disc.volume_points(e).unwrap() {
            assert!((eval(&disc, &x, 1, 0, &qp.param) - 2.0 / area).abs() < 1e-11);
        }
    }
}

#[test]
fn rejected_problem_setups() {
    let disc = circle_case(2, 2, 8, 3);
    let mut problem = ProblemDefinition::poisson();
    problem.mean_constraint = Some(MeanConstraint::Target(0.0));
    problem.dirichlet.push(DirichletCondition { face: 2, component: None, value: field(|_| 0.0) });
    assert_eq!(assemble_problem(&disc, &problem).unwrap_err(), Error::ConstraintWithDirichlet);
    // the whole face x = -L/2 lies outside the disc
    problem.mean_constraint = None;
    problem.dirichlet[0].face = 0;
    assert_eq!(assemble_problem(&disc, &problem).unwrap_err(), Error::TrimmedDirichletFace { face: 0 });
    problem.dirichlet[0].face = 4;
    assert!(matches!(assemble_problem(&disc, &problem), Err(Error::InvalidProblem(_))));
    let mut elastic = ProblemDefinition::poisson();
    elastic.pde = Pde::Elasticity3d;
    elastic.material = Some(Material { youngs_modulus: 1.0, poisson_ratio: 0.3 });
    assert!(matches!(assemble(&disc, &elastic), Err(Error::InvalidProblem(_))));
    elastic.pde = Pde::ElasticityPlaneStrain;
    elastic.material = Some(Material { youngs_modulus: 1.0, poisson_ratio: 0.5 });
    assert!(matches!(assemble(&disc, &elastic), Err(Error::InvalidProblem(_))));
}

#[test]
fn clamped_elastic_block_under_uniform_traction() {
    // uniaxial tension: u_x = T x / E', u_y = -nu' T y / E' in plane strain
    let (e, nu, t) = (200.0, 0.25, 3.0);
    let disc = untrimmed(2, 3, [0.0; 3], [2.0, 1.0, 0.0]);
    let mut problem = ProblemDefinition::poisson();
    problem.pde = Pde::ElasticityPlaneStrain;
    problem.material = Some(Material { youngs_modulus: e, poisson_ratio: nu });
    problem.neumann = Some(Arc::new(move |_, n, _| [t * n[0], 0.0, 0.0]));
    let zero = field(|_| 0.0);
    problem.dirichlet.push(DirichletCondition { face: 0, component: Some(0), value: zero.clone() });
    problem.dirichlet.push(DirichletCondition { face: 2, component: Some(1), value: zero });
    let sys = assemble_problem(&disc, &problem).unwrap();
    let (diff, max) = sys.matrix.asymmetry();
    assert!(diff <= 1e-12 * max);
    let x = solve(&sys).unwrap().solution;
    let (ep, nup) = (e / (1.0 - nu * nu), nu / (1.0 - nu));
    let s = [0.8, 0.6, 0.0];
    let phys = disc.map.map_point(&s);
    assert!((eval(&disc, &x, 2, 0, &s) - t * phys[0] / ep).abs() < 1e-12);
    assert!((eval(&disc, &x, 2, 1, &s) + nup * t * phys[1] / ep).abs() < 1e-12);
}

fn circle_energy(n: usize, p: usize, quad_points: usize) -> f64 {
    let l = 2.0 / 0.7;
    let k = 2.0 * std::f64::consts::PI / l;
    let disc = circle_case(p, p, n, quad_points);
    let mut problem = ProblemDefinition::poisson();
    problem.source = Some(field(move |x| 2.0 * k * k * (k * x[0]).sin() * (k * x[1]).sin()));
    let boundary = disc.boundary.clone();
    problem.neumann = Some(Arc::new(move |x, n_h, part| {
        let n = if part == BoundaryPart::Trimmed { boundary.outward_normal(x) } else { *n_h };
        let g = [k * (k * x[0]).cos() * (k * x[1]).sin(), k * (k * x[0]).sin() * (k * x[1]).cos()];
        [g[0] * n[0] + g[1] * n[1], 0.0, 0.0]
    }));
    problem.mean_constraint = Some(MeanConstraint::Target(0.0));
    let sys = assemble_problem(&disc, &problem).unwrap();
    let x = solve(&sys).unwrap().solution;
    let ax = sys.matrix.mul_vec(&x);
    x.iter().zip(&ax).map(|(a, b)| a * b).sum()
}

#[test]
fn energy_is_stable_under_quadrature_refinement() {
    for (n, p) in [(32, 2), (16, 3)] {
        let (e0, e1) = (circle_energy(n, p, p + 1), circle_energy(n, p, p + 2));
        assert!(((e0 - e1) / e1).abs() < 1e-7, "{e0} vs {e1}");
    }
}
