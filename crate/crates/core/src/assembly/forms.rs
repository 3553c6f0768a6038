use super::{BoundaryPart, Discretization, LinearSystem, Pde, ProblemDefinition};
use crate::error::{Error, Result};
use crate::point::{dot, Point};
use crate::sparse::SparseMatrix;
use crate::splines::BasisValues;
use rayon::prelude::*;

struct ElementContribution {
    unknowns: Vec<usize>,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

pub(crate) fn check_problem(disc: &Discretization, problem: &ProblemDefinition) -> Result<usize> {
    let dim = disc.dim();
    match (problem.pde, dim) {
        (Pde::ElasticityPlaneStrain, 2) | (Pde::Elasticity3d, 3) | (Pde::Poisson, _) => {}
        (pde, d) => return Err(Error::InvalidProblem(format!("{pde:?} on a {d}D patch"))),
    }
    if problem.pde != Pde::Poisson {
        let m = problem
            .material
            .ok_or_else(|| Error::InvalidProblem("elasticity requires a material".into()))?;
        if !(m.youngs_modulus > 0.0) || !(0.0..0.5).contains(&m.poisson_ratio) {
            return Err(Error::InvalidProblem(format!(
                "material needs E > 0 and 0 <= nu < 0.5, got E = {}, nu = {}",
                m.youngs_modulus, m.poisson_ratio
            )));
        }
    }
    for d in &problem.dirichlet {
        if d.face >= 2 * dim {
            return Err(Error::InvalidProblem(format!("Dirichlet face {} on a {dim}D patch", d.face)));
        }
        let k = problem.pde.components(dim);
        if d.component.is_some_and(|c| c >= k) {
            return Err(Error::InvalidProblem(format!("Dirichlet component out of range on face {}", d.face)));
        }
    }
    Ok(problem.pde.components(dim))
}

/// Stiffness matrix and load vector over all active unknowns, without
/// boundary conditions or constraints. Unknown `k * i + c` is component `c`
/// of active function `i`.
pub fn assemble(disc: &Discretization, problem: &ProblemDefinition) -> Result<LinearSystem> {
    let k = check_problem(disc, problem)?;
    let n = disc.active.len() * k;
    let (lambda, mu) = problem.material.map(|m| m.lame()).unwrap_or((0.0, 0.0));
    let contributions: Vec<ElementContribution> = disc
        .active_elements()
        .par_iter()
        .map(|&flat| element_contribution(disc, problem, flat, k, lambda, mu))
        .collect::<Result<_>>()?;
    let mut triplets = Vec::with_capacity(contributions.iter().map(|c| c.matrix.len()).sum());
    let mut rhs = vec![0.0; n];
    for c in &contributions {
        let m = c.unknowns.len();
        for (a, &ia) in c.unknowns.iter().enumerate() {
            rhs[ia] += c.rhs[a];
            for (b, &ib) in c.unknowns.iter().enumerate() {
                triplets.push((ia, ib, c.matrix[a * m + b]));
            }
        }
    }
    let owners = (0..n).map(|u| (disc.active[u / k], u % k)).collect();
    Ok(LinearSystem {
        matrix: SparseMatrix::from_triplets(n, triplets),
        rhs,
        constraint: None,
        dirichlet: Vec::new(),
        free: (0..n).collect(),
        owners,
        n_full: n,
        components: k,
    })
}

fn element_contribution(
    disc: &Discretization,
    problem: &ProblemDefinition,
    flat: usize,
    k: usize,
    lambda: f64,
    mu: f64,
) -> Result<ElementContribution> {
    let dim = disc.dim();
    let element = disc.mesh.elements[flat].index;
    let funcs = disc.space.element_functions(element);
    let nf = funcs.len();
    let m = nf * k;
    let mut unknowns = Vec::with_capacity(m);
    for &f in &funcs {
        let local = disc.local_of[f];
        debug_assert!(local != usize::MAX, "function of an active element is active");
        for c in 0..k {
            unknowns.push(local * k + c);
        }
    }
    let mut matrix = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    let mut bv = BasisValues::default();
    let mut grads: Vec<Point> = Vec::with_capacity(nf);
    for qp in disc.volume_points(flat)? {
        disc.space.eval_into(element, &qp.param, &mut bv);
        disc.physical_gradients(&qp.inv_t, &bv.gradients, &mut grads);
        let w = qp.weight;
        match problem.pde {
            Pde::Poisson => {
                for a in 0..nf {
                    for b in a..nf {
                        let v = w * dot(&grads[a], &grads[b]);
                        matrix[a * m + b] += v;
                        if a != b {
                            matrix[b * m + a] += v;
                        }
                    }
                }
            }
            _ => {
                for a in 0..nf {
                    for b in 0..nf {
                        let (ga, gb) = (&grads[a], &grads[b]);
                        let gg = dot(ga, gb);
                        for i in 0..dim {
                            for j in 0..dim {
                                let mut v = lambda * ga[i] * gb[j] + mu * ga[j] * gb[i];
                                if i == j {
                                    v += mu * gg;
                                }
                                matrix[(a * k + i) * m + b * k + j] += w * v;
                            }
                        }
                    }
                }
            }
        }
        if let Some(f) = &problem.source {
            let fv = f(&qp.physical);
            for a in 0..nf {
                for c in 0..k {
                    rhs[a * k + c] += w * fv[c] * bv.values[a];
                }
            }
        }
    }
    if let Some(g) = &problem.neumann {
        for (part, rule) in disc.boundary_rules(flat)? {
            if let BoundaryPart::BoxFace(id) = part {
                // fully constrained faces carry no natural condition
                if problem.dirichlet.iter().any(|d| d.face == id && (d.component.is_none() || k == 1)) {
                    continue;
                }
            }
            for i in 0..rule.weights.len() {
                let gv = g(&rule.physical[i], &rule.normals[i], part);
                disc.space.eval_into(element, &rule.points[i], &mut bv);
                for a in 0..nf {
                    for c in 0..k {
                        rhs[a * k + c] += rule.weights[i] * gv[c] * bv.values[a];
                    }
                }
            }
        }
    }
    Ok(ElementContribution { unknowns, matrix, rhs })
}
