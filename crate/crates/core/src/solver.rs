//! Diagonal scaling, preconditioned conjugate gradients and condition numbers.

use crate::assembly::LinearSystem;
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use nalgebra::{DMatrix, DVector};

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Outcome of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the (saddle, if constrained) system.
    pub residual: f64,
    /// False when the iteration cap was hit first.
    pub converged: bool,
}

/// `D = diag(1 / sqrt(A_ii))`. `owners` names the function and component of
/// each row for the error message.
pub fn diagonal_scaling(a: &SparseMatrix, owners: Option<&[(usize, usize)]>) -> Result<Vec<f64>> {
    a.diagonal()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v > 0.0 && v.is_finite() {
                Ok(1.0 / v.sqrt())
            } else {
                let (function, component) = owners.map(|o| o[i]).unwrap_or((i, 0));
                Err(Error::NonPositiveDiagonal { index: i, function, component, value: v })
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthogonal projector onto the complement of a unit vector.
#[derive(Clone)]
struct Projector {
    unit: Option<Vec<f64>>,
}

impl Projector {
    fn apply(&self, v: &mut [f64]) {
        if let Some(u) = &self.unit {
            let s = dot(u, v);
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= s * ui;
            }
        }
    }
}

/// Conjugate gradients on `D A D y = D b` with `x = D y`, optionally
/// restricted to the affine space `c . x = target`. Stops when the relative
/// residual of the original system is below `tol`. The observer sees every
/// iterate `x_k`, starting with `x_0`.
#[allow(clippy::too_many_arguments)]
fn cg_core(
    a: &SparseMatrix,
    b: &[f64],
    d: &[f64],
    constraint: Option<(&[f64], f64)>,
    tol: f64,
    maxit: usize,
    observer: &mut dyn FnMut(&[f64]),
) -> SolveReport {
    let n = a.n;
    let bt: Vec<f64> = b.iter().zip(d).map(|(x, y)| x * y).collect();
    let mut y = vec![0.0; n];
    let mut proj = Projector { unit: None };
    if let Some((c, target)) = constraint {
        let ct: Vec<f64> = c.iter().zip(d).map(|(x, y)| x * y).collect();
        let cn = norm(&ct);
        for (yi, ci) in y.iter_mut().zip(&ct) {
            *yi = target * ci / (cn * cn);
        }
        proj.unit = Some(ct.iter().map(|v| v / cn).collect());
    }
    let da = a.scale_symmetric(d);
    let mut r = da.mul_vec(&y);
    for (ri, bi) in r.iter_mut().zip(&bt) {
        *ri = bi - *ri;
    }
    proj.apply(&mut r);
    let bnorm = {
        let extra = constraint.map(|(_, t)| t * t).unwrap_or(0.0);
        (dot(b, b) + extra).sqrt()
    };
    let to_x = |y: &[f64]| y.iter().zip(d).map(|(v, s)| v * s).collect::<Vec<f64>>();
    // residual of the original system from the scaled one: r = r~ / d
    let true_res = |r: &[f64]| r.iter().zip(d).map(|(v, s)| (v / s) * (v / s)).sum::<f64>().sqrt();
    observer(&to_x(&y));
    if bnorm == 0.0 {
        return SolveReport { solution: to_x(&y), iterations: 0, residual: 0.0, converged: true };
    }
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut q = vec![0.0; n];
    let mut it = 0;
    let mut res = true_res(&r) / bnorm;
    while res > tol && it < maxit {
        da.mul_vec_into(&p, &mut q);
        proj.apply(&mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            break;
        }
        let alpha = rr / pq;
        for i in 0..n {
            y[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        it += 1;
        // periodic replacement of the recursive residual limits drift
        if it % 50 == 0 {
            da.mul_vec_into(&y, &mut q);
            for i in 0..n {
                r[i] = bt[i] - q[i];
            }
            proj.apply(&mut r);
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        observer(&to_x(&y));
        res = true_res(&r) / bnorm;
    }
    let x = to_x(&y);
    let residual = system_residual(a, b, constraint, &x) / bnorm;
    SolveReport { solution: x, iterations: it, residual, converged: residual <= tol * 10.0 || res <= tol }
}

/// Relative residual of `A x = b`, or of the saddle system with the
/// least-squares multiplier when a constraint is present.
fn system_residual(a: &SparseMatrix, b: &[f64], constraint: Option<(&[f64], f64)>, x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut extra = 0.0;
    if let Some((c, target)) = constraint {
        let lambda = dot(c, &r) / dot(c, c);
        for (ri, ci) in r.iter_mut().zip(c) {
            *ri -= lambda * ci;
        }
        extra = (dot(c, x) - target).powi(2);
    }
    (dot(&r, &r) + extra).sqrt()
}

/// Preconditioned conjugate gradients with the symmetric diagonal scaling `D`.
pub fn pcg(a: &SparseMatrix, b: &[f64], d: &[f64], tol: f64, maxit: usize) -> SolveReport {
    cg_core(a, b, d, None, tol, maxit, &mut |_| {})
}

/// As [`pcg`], recording every iterate.
pub fn pcg_trace(a: &SparseMatrix, b: &[f64], d: &[f64], tol: f64, maxit: usize) -> (SolveReport, Vec<Vec<f64>>) {
    let mut trace = Vec::new();
    let rep = cg_core(a, b, d, None, tol, maxit, &mut |x| trace.push(x.to_vec()));
    (rep, trace)
}

/// Projected preconditioned CG for `A x = b` subject to `c . x = target`.
pub fn pcg_constrained(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    target: f64,
    d: &[f64],
    tol: f64,
    maxit: usize,
) -> SolveReport {
    cg_core(a, b, d, Some((c, target)), tol, maxit, &mut |_| {})
}

/// Solve an assembled system with default tolerance and iteration cap.
/// The returned solution covers all unknowns, eliminated ones included.
pub fn solve(system: &LinearSystem) -> Result<SolveReport> {
    let d = diagonal_scaling(&system.matrix, Some(&system.owners))?;
    let maxit = 10 * system.len().max(1);
    let mut rep = match &system.constraint {
        Some(c) => pcg_constrained(&system.matrix, &system.rhs, &c.row, c.target, &d, DEFAULT_TOL, maxit),
        None => pcg(&system.matrix, &system.rhs, &d, DEFAULT_TOL, maxit),
    };
    rep.solution = system.expand(&rep.solution);
    Ok(rep)
}

/// Whether a condition number is taken of `A` or of `D A D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMode {
    Raw,
    Scaled,
}

/// Eigenvalue method for condition numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMethod {
    /// Dense up to [`DENSE_LIMIT`] unknowns, Lanczos above.
    Auto,
    Dense,
    Lanczos,
}

pub const DENSE_LIMIT: usize = 2000;

/// `lambda_max / lambda_min` of `A` or `D A D`, restricted to the null space
/// of the constraint row when one is given. Returns infinity for singular
/// operators.
pub fn condition_number(
    a: &SparseMatrix,
    mode: ConditionMode,
    constraint: Option<&[f64]>,
    method: ConditionMethod,
) -> Result<f64> {
    let d = diagonal_scaling(a, None)?;
    let (m, c) = match mode {
        ConditionMode::Raw => (a.clone(), constraint.map(|c| c.to_vec())),
        ConditionMode::Scaled => {
            (a.scale_symmetric(&d), constraint.map(|c| c.iter().zip(&d).map(|(x, y)| x * y).collect()))
        }
    };
    let dense = match method {
        ConditionMethod::Auto => m.n <= DENSE_LIMIT,
        ConditionMethod::Dense => true,
        ConditionMethod::Lanczos => false,
    };
    let (lmin, lmax) = if dense {
        dense_extremes(&m, c.as_deref())
    } else {
        // the inverse is applied through scaled PCG solves of the operator
        let dm = diagonal_scaling(&m, None)?;
        lanczos_extremes(&m, &dm, c.as_deref())
    };
    if !(lmin > 0.0) || lmin <= lmax * 1e-16 {
        return Ok(f64::INFINITY);
    }
    Ok(lmax / lmin)
}

fn dense_extremes(m: &SparseMatrix, c: Option<&[f64]>) -> (f64, f64) {
    let mut a = m.to_dense();
    if let Some(c) = c {
        // Householder reflection H with H c parallel to e_1; H A H restricted
        // to indices 1.. is the operator on the null space of c
        let n = a.nrows();
        let mut v = DVector::from_column_slice(c);
        let cn = v.norm();
        let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += s * cn;
        let vv = v.dot(&v);
        let av = &a * &v;
        let vav = v.dot(&av);
        let coef = 2.0 / vv;
        let mut h = a.clone();
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] += -coef * (v[i] * av[j] + av[i] * v[j]) + coef * coef * vav * v[i] * v[j];
            }
        }
        a = h.view((1, 1), (n - 1, n - 1)).into_owned();
    }
    let lmax = a.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // the dense spectrum only resolves lambda_min down to about eps * lambda_max;
    // the inverse applied through a Cholesky factor of the scaled matrix keeps
    // its relative accuracy for small-cut functions
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| 1.0 / a[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| d[i] * a[(i, j)] * d[j]);
    let Some(chol) = scaled.cholesky() else {
        return (0.0, lmax);
    };
    let proj = Projector { unit: None };
    let inv_max = lanczos_max(
        n,
        &mut |v| {
            let w = DVector::from_iterator(n, v.iter().zip(&d).map(|(x, s)| x * s));
            let z = chol.solve(&w);
            z.iter().zip(&d).map(|(x, s)| x * s).collect()
        },
        &proj,
    );
    (1.0 / inv_max, lmax)
}

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization, starting from a deterministic vector.
fn lanczos_max(n: usize, apply: &mut dyn FnMut(&[f64]) -> Vec<f64>, proj: &Projector) -> f64 {
    let mut q: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    proj.apply(&mut q);
    let qn = norm(&q);
    q.iter_mut().for_each(|v| *v /= qn);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    let maxk = n.min(300);
    for k in 0..maxk {
        let mut w = apply(&basis[k]);
        proj.apply(&mut w);
        let alpha = dot(&w, &basis[k]);
        alphas.push(alpha);
        for _ in 0..2 {
            for v in &basis {
                let s = dot(&w, v);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= s * vi;
                }
            }
        }
        let beta = norm(&w);
        let t = DMatrix::from_fn(k + 1, k + 1, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j || j + 1 == i {
                betas[i.min(j)]
            } else {
                0.0
            }
        });
        let theta = t.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if (theta - last).abs() <= 1e-9 * theta.abs() || beta <= 1e-14 * theta.abs() {
            return theta;
        }
        last = theta;
        if k + 1 == maxk {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|v| v / beta).collect());
    }
    last
}

fn lanczos_extremes(m: &SparseMatrix, d: &[f64], c: Option<&[f64]>) -> (f64, f64) {
    let n = m.n;
    let proj = Projector {
        unit: c.map(|c| {
            let cn = norm(c);
            c.iter().map(|v| v / cn).collect()
        }),
    };
    let lmax = lanczos_max(n, &mut |v| m.mul_vec(v), &proj);
    // inverse applications solve the scaled system, whose residual is a
    // meaningful stopping measure even when the raw operator is badly scaled
    let ms = m.scale_symmetric(d);
    let ones = vec![1.0; n];
    let cs: Option<Vec<f64>> = c.map(|c| c.iter().zip(d).map(|(x, s)| x * s).collect());
    let mut inverse = |v: &[f64]| {
        let dv: Vec<f64> = v.iter().zip(d).map(|(x, s)| x * s).collect();
        let rep = match &cs {
            Some(c) => cg_core(&ms, &dv, &ones, Some((c, 0.0)), 1e-12, 20 * n, &mut |_| {}),
            None => cg_core(&ms, &dv, &ones, None, 1e-12, 20 * n, &mut |_| {}),
        };
        rep.solution.iter().zip(d).map(|(x, s)| x * s).collect::<Vec<f64>>()
    };
    let inv_max = lanczos_max(n, &mut inverse, &proj);
    (1.0 / inv_max, lmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};

    fn random_spd(n: usize, seed: u64) -> (SparseMatrix, DMatrix<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let mut a = &b * b.transpose();
        for i in 0..n {
            a[(i, i)] += 0.1 * (1.0 + i as f64);
        }
        let trip = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, a[(i, j)])).collect();
        (SparseMatrix::from_triplets(n, trip), a)
    }

    #[test]
    fn scaling_of_diagonal_matrices() {
        let i = SparseMatrix::identity(3);
        assert_eq!(diagonal_scaling(&i, None).unwrap(), vec![1.0; 3]);
        let a = SparseMatrix::from_diagonal(&[4.0, 9.0]);
        let d = diagonal_scaling(&a, None).unwrap();
        assert_eq!(d, vec![0.5, 1.0 / 3.0]);
        assert_eq!(a.scale_symmetric(&d).diagonal(), vec![1.0, 1.0]);
        let bad = SparseMatrix::from_diagonal(&[1.0, 0.0]);
        let e = diagonal_scaling(&bad, Some(&[(10, 0), (11, 1)]));
        assert!(matches!(e, Err(Error::NonPositiveDiagonal { index: 1, function: 11, component: 1, .. })));
    }

    #[test]
    fn small_diagonal_solve() {
        let a = SparseMatrix::from_diagonal(&[2.0, 3.0]);
        let d = diagonal_scaling(&a, None).unwrap();
        let r = pcg(&a, &[2.0, 3.0], &d, 1e-14, 20);
        assert!(r.iterations <= 2 && r.converged);
        assert!((r.solution[0] - 1.0).abs() < 1e-14 && (r.solution[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_spd_matches_dense_solve() {
        let (a, dense) = random_spd(50, 11);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let d = diagonal_scaling(&a, None).unwrap();
        let r = pcg(&a, &b, &d, 1e-13, 500);
        let exact = dense.cholesky().unwrap().solve(&DVector::from_column_slice(&b));
        let err = (DVector::from_column_slice(&r.solution) - &exact).norm() / exact.norm();
        assert!(err < 1e-9, "{err}");
        // same answer from the explicitly scaled system
        let s = a.scale_symmetric(&d);
        let db: Vec<f64> = b.iter().zip(&d).map(|(x, y)| x * y).collect();
        let y = pcg(&s, &db, &vec![1.0; 50], 1e-13, 500).solution;
        for i in 0..50 {
            assert!((y[i] * d[i] - r.solution[i]).abs() <= 1e-9 * exact.amax());
        }
    }

    #[test]
    fn energy_error_is_monotone() {
        let (a, dense) = random_spd(40, 5);
        let dense = &dense;
        let b: Vec<f64> = (0..40).map(|i| 1.0 + i as f64).collect();
        let d = diagonal_scaling(&a, None).unwrap();
        let (_, trace) = pcg_trace(&a, &b, &d, 1e-13, 400);
        let exact = dense.clone().cholesky().unwrap().solve(&DVector::from_column_slice(&b));
        let energies: Vec<f64> = trace
            .iter()
            .map(|x| {
                let e = DVector::from_column_slice(x) - &exact;
                e.dot(&(dense * &e))
            })
            .collect();
        for w in energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-20, "{} > {}", w[1], w[0]);
        }
    }

    #[test]
    fn constrained_solve_satisfies_constraint() {
        let (a, dense) = random_spd(30, 2);
        let b: Vec<f64> = (0..30).map(|i| (0.3 * i as f64).cos()).collect();
        let c: Vec<f64> = (0..30).map(|i| 1.0 + 0.01 * i as f64).collect();
        let d = diagonal_scaling(&a, None).unwrap();
        let r = pcg_constrained(&a, &b, &c, 2.5, &d, 1e-12, 1000);
        assert!(r.converged && r.residual < 1e-11);
        assert!((dot(&c, &r.solution) - 2.5).abs() < 1e-10);
        // saddle system oracle
        let mut k = DMatrix::zeros(31, 31);
        k.view_mut((0, 0), (30, 30)).copy_from(&dense);
        for i in 0..30 {
            k[(30, i)] = c[i];
            k[(i, 30)] = c[i];
        }
        let mut rhs = DVector::zeros(31);
        rhs.rows_mut(0, 30).copy_from(&DVector::from_column_slice(&b));
        rhs[30] = 2.5;
        let sol = k.lu().solve(&rhs).unwrap();
        for i in 0..30 {
            assert!((sol[i] - r.solution[i]).abs() < 1e-9 * sol.amax());
        }
    }

    #[test]
    fn condition_numbers() {
        let a = SparseMatrix::from_diagonal(&[1.0, 100.0]);
        let k = condition_number(&a, ConditionMode::Raw, None, ConditionMethod::Dense).unwrap();
        assert!((k - 100.0).abs() < 1e-10);
        let a = SparseMatrix::from_diagonal(&[4.0, 9.0]);
        let k = condition_number(&a, ConditionMode::Scaled, None, ConditionMethod::Auto).unwrap();
        assert!((k - 1.0).abs() < 1e-14);
        let (a, _) = random_spd(200, 9);
        for mode in [ConditionMode::Raw, ConditionMode::Scaled] {
            let kd = condition_number(&a, mode, None, ConditionMethod::Dense).unwrap();
            let kl = condition_number(&a, mode, None, ConditionMethod::Lanczos).unwrap();
            assert!((kd - kl).abs() < 0.01 * kd, "{mode:?}: {kd} vs {kl}");
        }
        let c: Vec<f64> = (0..200).map(|i| 1.0 + (i % 3) as f64).collect();
        let kd = condition_number(&a, ConditionMode::Scaled, Some(&c), ConditionMethod::Dense).unwrap();
        let kl = condition_number(&a, ConditionMode::Scaled, Some(&c), ConditionMethod::Lanczos).unwrap();
        assert!((kd - kl).abs() < 0.01 * kd, "{kd} vs {kl}");
        let singular = SparseMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let k = condition_number(&singular, ConditionMode::Raw, None, ConditionMethod::Dense).unwrap();
        assert!(k.is_infinite());
    }
}
