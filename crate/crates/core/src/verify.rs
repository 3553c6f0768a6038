//! Invariant suite run by `trimmed-iga verify`.

use crate::analysis::{convergence_study, discretize, write_csv, CaseKind, RunSettings};
use crate::assembly::{assemble, assemble_problem};
use crate::quadrature::{collapsed_triangle, gauss_legendre};
use crate::reparam::validate;
use crate::solver::solve;
use crate::splines::{KnotVector, TensorBSplineSpace};
use crate::trimming::ElementLabel;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub secs: f64,
}

type Outcome = std::result::Result<String, String>;

/// Run every check. `seed` drives the random samples.
pub fn run_all(seed: u64) -> Vec<Check> {
    let checks: [(&'static str, fn(u64) -> Outcome); 7] = [
        ("partition_of_unity", partition_of_unity),
        ("gauss_exactness", gauss_exactness),
        ("push_forward_measure", push_forward_measure),
        ("assembly_symmetry_spd", assembly_symmetry_spd),
        ("dimension_lemma", dimension_lemma),
        ("tile_validity", tile_validity),
        ("byte_identical_reruns", byte_identical_reruns),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let out = f(seed);
            let secs = t.elapsed().as_secs_f64();
            match out {
                Ok(detail) => Check { name, passed: true, detail, secs },
                Err(detail) => Check { name, passed: false, detail, secs },
            }
        })
        .collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_knots(rng: &mut ChaCha8Rng, p: usize) -> KnotVector {
    let spans = 1 + rng.random_range(0..6usize);
    let mut inner: Vec<f64> = (1..spans).map(|_| rng.random::<f64>()).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut k = vec![0.0; p + 1];
    k.extend(inner);
    k.extend(vec![1.0; p + 1]);
    KnotVector::new(p, k).expect("open knot vector")
}

fn partition_of_unity(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for p in 1..=6 {
        for dim in [2, 3] {
            let dirs = (0..dim).map(|_| random_knots(&mut rng, p)).collect();
            let space = TensorBSplineSpace::new(dirs).map_err(|e| e.to_string())?;
            for _ in 0..50 {
                let mut x = [0.0; 3];
                for v in x.iter_mut().take(dim) {
                    *v = rng.random::<f64>();
                }
                let b = space.eval_basis(space.find_element(&x), &x).map_err(|e| e.to_string())?;
                let sum: f64 = b.values.iter().sum();
                let mut g = [0.0; 3];
                for gr in &b.gradients {
                    for d in 0..3 {
                        g[d] += gr[d];
                    }
                }
                let gscale = b.gradients.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
                worst = worst.max((sum - 1.0).abs()).max(g.iter().fold(0.0f64, |m, v| m.max(v.abs())) / gscale);
                ensure(b.values.iter().all(|&v| v >= -1e-15), || format!("negative basis value at {x:?}"))?;
            }
        }
    }
    ensure(worst < 1e-13, || format!("deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e} over p = 1..6, 2D and 3D"))
}

fn gauss_exactness(_: u64) -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let g = gauss_legendre(n, 1).map_err(|e| e.to_string())?;
        for k in 0..2 * n {
            let q: f64 = g.points.iter().zip(&g.weights).map(|(p, w)| w * p[0].powi(k as i32)).sum();
            worst = worst.max((q - 1.0 / (k + 1) as f64).abs());
        }
        let t = collapsed_triangle(n).map_err(|e| e.to_string())?;
        for a in 0..2 * n - 1 {
            for b in 0..2 * n - 1 - a {
                let q: f64 = t
                    .points
                    .iter()
                    .zip(&t.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                // int x^a y^b over the unit triangle = a! b! / (a + b + 2)!
                let exact = (1..=a).map(|i| i as f64).product::<f64>() * (1..=b).map(|i| i as f64).product::<f64>()
                    / (1..=a + b + 2).map(|i| i as f64).product::<f64>();
                worst = worst.max((q - exact).abs());
            }
        }
    }
    ensure(worst < 1e-13, || format!("error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} for n = 1..10"))
}

fn push_forward_measure(_: u64) -> Outcome {
    let mut lines = Vec::new();
    for (kind, p, levels) in [(CaseKind::Poisson2d, 3, [8, 16, 32]), (CaseKind::Plate, 2, [8, 16, 32]), (CaseKind::Poisson3d, 2, [2, 4, 8])] {
        let case = kind.build();
        let mut last = f64::INFINITY;
        for n in levels {
            let disc = discretize(&case, n, &RunSettings::new(p, p)).map_err(|e| e.to_string())?;
            let (vol, _) = disc.measures().map_err(|e| e.to_string())?;
            let rel = (vol - case.exact_measure).abs() / case.exact_measure;
            ensure(rel < last, || format!("{kind}: measure error does not decrease at {n} elements"))?;
            last = rel;
        }
        ensure(last < 1e-4, || format!("{kind}: relative measure error {last:e}"))?;
        lines.push(format!("{kind} {last:.1e}"));
    }
    Ok(lines.join(", "))
}

fn assembly_symmetry_spd(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    for (kind, n) in [(CaseKind::Poisson2d, 16), (CaseKind::Plate, 8), (CaseKind::Poisson3d, 4)] {
        let case = kind.build();
        let disc = discretize(&case, n, &RunSettings::new(2, 2)).map_err(|e| e.to_string())?;
        let raw = assemble(&disc, &case.problem).map_err(|e| e.to_string())?;
        let (diff, max) = raw.matrix.asymmetry();
        ensure(diff <= 1e-12 * max, || format!("{kind}: asymmetry {diff:e} of {max:e}"))?;
        for _ in 0..100 {
            let x: Vec<f64> = (0..raw.len()).map(|_| rng.random::<f64>() - 0.5).collect();
            let ax = raw.matrix.mul_vec(&x);
            let q: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
            let n2: f64 = x.iter().map(|v| v * v).sum();
            ensure(q >= -1e-10 * n2 * max, || format!("{kind}: x^T A x = {q:e}"))?;
        }
        let sys = assemble_problem(&disc, &case.problem).map_err(|e| e.to_string())?;
        let rep = solve(&sys).map_err(|e| e.to_string())?;
        ensure(rep.converged && rep.residual <= 1e-11, || format!("{kind}: residual {:e}", rep.residual))?;
        lines.push(format!("{kind} n={} it={}", sys.len(), rep.iterations));
    }
    Ok(lines.join(", "))
}

fn dimension_lemma(_: u64) -> Outcome {
    let mut lines = Vec::new();
    for (kind, n) in [(CaseKind::Poisson2d, 16), (CaseKind::Plate, 8), (CaseKind::Poisson3d, 4)] {
        let case = kind.build();
        let disc = discretize(&case, n, &RunSettings::new(2, 2)).map_err(|e| e.to_string())?;
        // recount: a function is active iff some element of its support is active
        let count = (0..disc.space.num_basis())
            .filter(|&f| {
                disc.space
                    .active_elements_of_function(f)
                    .iter()
                    .any(|&e| disc.label(disc.space.element_flat(e)) != ElementLabel::Exterior)
            })
            .count();
        ensure(count == disc.active.len(), || format!("{kind}: {count} vs {}", disc.active.len()))?;
        let sys = assemble_problem(&disc, &case.problem).map_err(|e| e.to_string())?;
        let k = case.components();
        ensure(sys.len() + sys.dirichlet.len() == k * count, || format!("{kind}: block size mismatch"))?;
        lines.push(format!("{kind} {count}"));
    }
    Ok(lines.join(", "))
}

fn tile_validity(_: u64) -> Outcome {
    let mut tiles = 0;
    let mut min_det = f64::INFINITY;
    let mut max_phi: f64 = 0.0;
    let runs: [(CaseKind, usize, &[usize]); 3] =
        [(CaseKind::Poisson2d, 16, &[1, 2, 3, 4]), (CaseKind::Plate, 8, &[1, 2, 3]), (CaseKind::Poisson3d, 4, &[1, 2, 3])];
    for (kind, n, rs) in runs {
        let case = kind.build();
        for &r in rs {
            let s = RunSettings::new(r, r);
            let disc = discretize(&case, n, &s).map_err(|e| e.to_string())?;
            for rp in disc.reparams.iter().flatten() {
                let v = validate(rp, &case.boundary, &disc.map, s.reparam_options().quad_points);
                ensure(v.contained && v.min_det_j > 0.0, || format!("{kind} r={r}: element {:?} {v:?}", rp.element))?;
                tiles += rp.tiles.len();
                min_det = min_det.min(v.min_det_j);
                max_phi = max_phi.max(v.max_phi_on_gamma_h);
            }
        }
    }
    ensure(max_phi < 1e-12, || format!("trimmed nodes off the boundary by {max_phi:e}"))?;
    Ok(format!("{tiles} tiles, min det {min_det:.2e}, max |phi| {max_phi:.1e}"))
}

fn byte_identical_reruns(_: u64) -> Outcome {
    let mut s = RunSettings::new(2, 2);
    s.condition = true;
    let run = || {
        let mut out = Vec::new();
        write_csv(&convergence_study(CaseKind::Poisson2d, &[s], &[8, 16]), &mut out).map(|_| out)
    };
    let a = run().map_err(|e| e.to_string())?;
    let b = run().map_err(|e| e.to_string())?;
    ensure(a == b, || "CSV output differs between runs".into())?;
    Ok(format!("{} bytes", a.len()))
}
