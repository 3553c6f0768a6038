use super::ManufacturedCase;
use crate::assembly::Discretization;
use crate::error::Result;
use crate::point::{Mat3, Point};
use crate::splines::BasisValues;
use crate::trimming::ElementLabel;
use rayon::prelude::*;

/// Error of a discrete solution in `L2` and the full `H1` norm, split into
/// cut and interior element contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
    pub l2_cut: f64,
    pub l2_int: f64,
    pub h1_cut: f64,
    pub h1_int: f64,
}

/// Value and physical gradient of a field with `k` components per function;
/// `coeffs` holds all unknowns, function-major.
pub fn evaluate_solution(
    disc: &Discretization,
    coeffs: &[f64],
    k: usize,
    element: [usize; 3],
    param: &Point,
    inv_t: &Mat3,
    bv: &mut BasisValues,
    grads: &mut Vec<Point>,
) -> ([f64; 3], Mat3) {
    disc.space.eval_into(element, param, bv);
    disc.physical_gradients(inv_t, &bv.gradients, grads);
    let mut value = [0.0; 3];
    let mut grad = [[0.0; 3]; 3];
    for (a, &f) in bv.indices.iter().enumerate() {
        let local = disc.local_of[f];
        for c in 0..k {
            let x = coeffs[local * k + c];
            value[c] += x * bv.values[a];
            for d in 0..3 {
                grad[c][d] += x * grads[a][d];
            }
        }
    }
    (value, grad)
}

/// Errors against the case's exact field, integrated with the assembly
/// quadrature over the discrete domain.
pub fn error_norms(disc: &Discretization, coeffs: &[f64], case: &ManufacturedCase) -> Result<ErrorNorms> {
    let k = case.components();
    let per_element: Vec<(bool, f64, f64)> = disc
        .active_elements()
        .par_iter()
        .map(|&flat| {
            let element = disc.mesh.elements[flat].index;
            let mut bv = BasisValues::default();
            let mut grads = Vec::new();
            let (mut l2, mut semi) = (0.0, 0.0);
            for qp in disc.volume_points(flat)? {
                let (v, g) = evaluate_solution(disc, coeffs, k, element, &qp.param, &qp.inv_t, &mut bv, &mut grads);
                let u = (case.exact_u)(&qp.physical);
                let gu = (case.exact_grad)(&qp.physical);
                for c in 0..k {
                    l2 += qp.weight * (v[c] - u[c]).powi(2);
                    for d in 0..case.dim {
                        semi += qp.weight * (g[c][d] - gu[c][d]).powi(2);
                    }
                }
            }
            Ok((disc.label(flat) == ElementLabel::Cut, l2, semi))
        })
        .collect::<Result<_>>()?;
    let mut s = [0.0f64; 4];
    for (cut, l2, semi) in per_element {
        let o = if cut { 0 } else { 2 };
        s[o] += l2;
        s[o + 1] += semi;
    }
    Ok(ErrorNorms {
        l2: (s[0] + s[2]).sqrt(),
        h1: (s[0] + s[1] + s[2] + s[3]).sqrt(),
        l2_cut: s[0].sqrt(),
        l2_int: s[2].sqrt(),
        h1_cut: (s[0] + s[1]).sqrt(),
        h1_int: (s[2] + s[3]).sqrt(),
    })
}
