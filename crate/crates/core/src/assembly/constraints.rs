use super::{check_problem, ConstraintRow, Discretization, LinearSystem, MeanConstraint, ProblemDefinition};
use crate::error::{Error, Result};
use crate::point::ORIGIN;
use crate::splines::BasisValues;
use crate::trimming::ElementLabel;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Attach the row `c_j = int B_j` and its target to a scalar system.
pub fn apply_mean_constraint(
    mut system: LinearSystem,
    disc: &Discretization,
    problem: &ProblemDefinition,
) -> Result<LinearSystem> {
    let constraint = problem
        .mean_constraint
        .as_ref()
        .ok_or_else(|| Error::InvalidProblem("no mean-value constraint configured".into()))?;
    if !problem.dirichlet.is_empty() || !system.dirichlet.is_empty() {
        return Err(Error::ConstraintWithDirichlet);
    }
    if system.components != 1 {
        return Err(Error::InvalidProblem("mean-value constraint needs a scalar problem".into()));
    }
    let mut row = vec![0.0; system.n_full];
    let mut integral = 0.0;
    let mut bv = BasisValues::default();
    for flat in disc.active_elements() {
        let element = disc.mesh.elements[flat].index;
        for qp in disc.volume_points(flat)? {
            disc.space.eval_into(element, &qp.param, &mut bv);
            for (&f, &v) in bv.indices.iter().zip(&bv.values) {
                row[disc.local_of[f]] += qp.weight * v;
            }
            if let MeanConstraint::IntegralOf(u) = constraint {
                integral += qp.weight * u(&qp.physical)[0];
            }
        }
    }
    let target = match constraint {
        MeanConstraint::Target(t) => *t,
        MeanConstraint::IntegralOf(_) => integral,
    };
    system.constraint = Some(ConstraintRow { row, target });
    Ok(system)
}

/// Strong Dirichlet conditions by collocation at the Greville points of the
/// face trace space, followed by symmetric elimination.
pub fn apply_dirichlet(
    system: LinearSystem,
    disc: &Discretization,
    problem: &ProblemDefinition,
) -> Result<LinearSystem> {
    if problem.dirichlet.is_empty() {
        return Ok(system);
    }
    if problem.mean_constraint.is_some() || system.constraint.is_some() {
        return Err(Error::ConstraintWithDirichlet);
    }
    if system.free.len() != system.n_full {
        return Err(Error::InvalidProblem("Dirichlet data applied twice".into()));
    }
    let k = check_problem(disc, problem)?;
    let dim = disc.dim();
    let space = &disc.space;
    let nper = space.dim_per_direction();
    let epd = space.elements_per_direction();
    let grev: Vec<Vec<f64>> = (0..dim).map(|d| space.knot_vector(d).greville()).collect();
    let mut fixed: BTreeMap<usize, f64> = BTreeMap::new();
    for cond in &problem.dirichlet {
        let (axis, side) = (cond.face / 2, cond.face % 2);
        let layer = if side == 0 { 0 } else { nper[axis] - 1 };
        let elayer = if side == 0 { 0 } else { epd[axis] - 1 };
        let on_face = |flat: usize| disc.mesh.elements[flat].index[axis] == elayer;
        if (0..disc.mesh.len()).filter(|&e| on_face(e)).all(|e| disc.label(e) == ElementLabel::Exterior) {
            return Err(Error::TrimmedDirichletFace { face: cond.face });
        }
        let funcs: Vec<usize> = disc
            .active
            .iter()
            .copied()
            .filter(|&f| space.multi_index(f)[axis] == layer)
            .collect();
        let pos: BTreeMap<usize, usize> = funcs.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let nf = funcs.len();
        let mut b = DMatrix::<f64>::zeros(nf, nf);
        let mut values = Vec::with_capacity(nf);
        let mut bv = BasisValues::default();
        for (i, &f) in funcs.iter().enumerate() {
            let mi = space.multi_index(f);
            let mut x = ORIGIN;
            for d in 0..dim {
                x[d] = if d == axis { side as f64 } else { grev[d][mi[d]] };
            }
            space.eval_into(space.find_element(&x), &x, &mut bv);
            for (&g, &v) in bv.indices.iter().zip(&bv.values) {
                if let Some(&j) = pos.get(&g) {
                    b[(i, j)] = v;
                }
            }
            values.push((cond.value)(&disc.map.map_point(&x)));
        }
        let lu = b.lu();
        let comps: Vec<usize> = match cond.component {
            Some(c) => vec![c],
            None => (0..k).collect(),
        };
        for c in comps {
            let rhs = DVector::from_iterator(nf, values.iter().map(|v| v[c]));
            let coef = lu.solve(&rhs).ok_or_else(|| {
                Error::InvalidProblem(format!("singular Dirichlet collocation on face {}", cond.face))
            })?;
            for (i, &f) in funcs.iter().enumerate() {
                fixed.entry(disc.local_of[f] * k + c).or_insert(coef[i]);
            }
        }
    }
    Ok(eliminate(system, fixed))
}

/// Remove fixed unknowns, moving their columns to the right-hand side.
fn eliminate(system: LinearSystem, fixed: BTreeMap<usize, f64>) -> LinearSystem {
    let n = system.n_full;
    let mut xd = vec![0.0; n];
    for (&i, &v) in &fixed {
        xd[i] = v;
    }
    let ax = system.matrix.mul_vec(&xd);
    let free: Vec<usize> = (0..n).filter(|i| !fixed.contains_key(i)).collect();
    let rhs = free.iter().map(|&i| system.rhs[i] - ax[i]).collect();
    let owners = free.iter().map(|&i| system.owners[i]).collect();
    LinearSystem {
        matrix: system.matrix.submatrix(&free),
        rhs,
        constraint: None,
        dirichlet: fixed.into_iter().collect(),
        free,
        owners,
        n_full: n,
        components: system.components,
    }
}
