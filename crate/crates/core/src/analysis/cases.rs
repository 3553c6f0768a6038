use crate::assembly::{BoundaryPart, DirichletCondition, Field, Material, MeanConstraint, Pde, ProblemDefinition};
use crate::error::{Error, Result};
use crate::point::{Mat3, Point, ORIGIN};
use crate::splines::GeometryMap;
use crate::trimming::{KeepSide, TrimmingBoundary};
use rand::{RngExt, SeedableRng};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Gradient field: row `c` is the gradient of component `c`.
pub type GradField = Arc<dyn Fn(&Point) -> Mat3 + Send + Sync>;

/// Benchmark identifiers accepted by the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseKind {
    /// Disc in a square, pure Neumann with mean-value constraint.
    Poisson2d,
    /// As [`CaseKind::Poisson2d`] on the distorted parameterization.
    Poisson2dDistorted,
    /// Quarter plate with a circular hole under uniaxial tension.
    Plate,
    /// Unit cube intersected with the unit ball.
    Poisson3d,
}

impl CaseKind {
    pub const ALL: [CaseKind; 4] = [CaseKind::Poisson2d, CaseKind::Poisson2dDistorted, CaseKind::Plate, CaseKind::Poisson3d];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Poisson2d => "poisson2d",
            CaseKind::Poisson2dDistorted => "poisson2d_distorted",
            CaseKind::Plate => "plate",
            CaseKind::Poisson3d => "poisson3d",
        }
    }

    pub fn build(self) -> ManufacturedCase {
        match self {
            CaseKind::Poisson2d => case_poisson_2d(false),
            CaseKind::Poisson2dDistorted => case_poisson_2d(true),
            CaseKind::Plate => case_plate_with_hole(),
            CaseKind::Poisson3d => case_poisson_3d(),
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = CaseKind::ALL.iter().map(|c| c.name()).collect();
            Error::InvalidProblem(format!("unknown case '{s}', expected one of {}", names.join(", ")))
        })
    }
}

/// Manufactured benchmark: geometry, weak problem and exact solution.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub dim: usize,
    /// Physical box covered by the untrimmed patch.
    pub lo: Point,
    pub hi: Point,
    pub distorted: bool,
    pub boundary: TrimmingBoundary,
    pub problem: ProblemDefinition,
    pub exact_u: Field,
    pub exact_grad: GradField,
    /// Exact measure of the kept domain.
    pub exact_measure: f64,
    /// Exact measure of the trimmed part of its boundary.
    pub exact_boundary_measure: f64,
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("kind", &self.kind)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("boundary", &self.boundary)
            .field("problem", &self.problem)
            .finish()
    }
}

impl ManufacturedCase {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Side length of the patch box along the first axis.
    pub fn length(&self) -> f64 {
        self.hi[0] - self.lo[0]
    }

    pub fn components(&self) -> usize {
        self.problem.pde.components(self.dim)
    }

    /// Geometry map for a space of the given degree and element count.
    pub fn map(&self) -> GeometryMap {
        if self.distorted {
            GeometryMap::distorted(self.lo, self.hi)
        } else {
            GeometryMap::identity_box(self.dim, self.lo, self.hi)
        }
    }

    /// Largest `| -div(flux(u)) - f |` over random kept points, with the
    /// divergence taken by finite differences of the exact gradient.
    pub fn pde_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let source = self.problem.source.clone();
        let (lambda, mu) = self.problem.material.map(|m| m.lame()).unwrap_or((0.0, 0.0));
        let k = self.components();
        let h = 1e-3 * self.length();
        let mut worst: f64 = 0.0;
        let mut found = 0;
        while found < samples {
            let mut x = ORIGIN;
            for d in 0..self.dim {
                x[d] = self.lo[d] + rng.random::<f64>() * (self.hi[d] - self.lo[d]);
            }
            // stay clear of the boundary and the axis singularity of the 3D field
            if self.boundary.phi(&x).abs() < 4.0 * h || (self.dim == 3 && x[0].hypot(x[1]) < 0.05) {
                continue;
            }
            if !self.boundary.keeps(&x) || (0..self.dim).any(|d| x[d] - self.lo[d] < 4.0 * h || self.hi[d] - x[d] < 4.0 * h) {
                continue;
            }
            found += 1;
            let flux = |y: &Point| -> Mat3 {
                let g = (self.exact_grad)(y);
                if self.problem.pde == Pde::Poisson {
                    return g;
                }
                let tr: f64 = (0..self.dim).map(|i| g[i][i]).sum();
                let mut s = [[0.0; 3]; 3];
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        s[i][j] = mu * (g[i][j] + g[j][i]) + if i == j { lambda * tr } else { 0.0 };
                    }
                }
                s
            };
            let mut div = [0.0; 3];
            for d in 0..self.dim {
                let stencil = fd8(|t| {
                    let mut y = x;
                    y[d] += t;
                    flux(&y)
                }, h);
                for c in 0..k {
                    div[c] += stencil[c][d];
                }
            }
            let f = source.as_ref().map(|f| f(&x)).unwrap_or([0.0; 3]);
            for c in 0..k {
                worst = worst.max((div[c] + f[c]).abs());
            }
        }
        worst
    }
}

/// Eighth-order central first derivative of a matrix-valued function.
fn fd8(f: impl Fn(f64) -> Mat3, h: f64) -> Mat3 {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut out = [[0.0; 3]; 3];
    for (i, w) in W.iter().enumerate() {
        let t = (i + 1) as f64 * h;
        let (a, b) = (f(t), f(-t));
        for r in 0..3 {
            for c in 0..3 {
                out[r][c] += w * (a[r][c] - b[r][c]) / h;
            }
        }
    }
    out
}

fn scalar(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(move |x| [f(x), 0.0, 0.0])
}

fn scalar_grad(f: impl Fn(&Point) -> Point + Send + Sync + 'static) -> GradField {
    Arc::new(move |x| [f(x), [0.0; 3], [0.0; 3]])
}

/// Neumann datum `flux(u)(x) . n`, with the exact boundary normal on the
/// trimmed part and the face normal elsewhere.
fn exact_flux_neumann(boundary: TrimmingBoundary, flux: Arc<dyn Fn(&Point) -> Mat3 + Send + Sync>) -> crate::assembly::NeumannField {
    Arc::new(move |x, n_h, part| {
        let n = if part == BoundaryPart::Trimmed { boundary.outward_normal(x) } else { *n_h };
        let s = flux(x);
        let mut g = [0.0; 3];
        for c in 0..3 {
            g[c] = s[c][0] * n[0] + s[c][1] * n[1] + s[c][2] * n[2];
        }
        g
    })
}

/// Side length of the square around the unit disc.
pub const POISSON_2D_LENGTH: f64 = 2.0 / 0.7;

/// `u = sin(2 pi x / L) sin(2 pi y / L)` on the unit disc centered in a
/// square of side `L = 2 / 0.7`; Neumann data everywhere, mean fixed.
pub fn case_poisson_2d(distorted: bool) -> ManufacturedCase {
    let l = POISSON_2D_LENGTH;
    let k = 2.0 * PI / l;
    let exact_u = scalar(move |x| (k * x[0]).sin() * (k * x[1]).sin());
    let exact_grad = scalar_grad(move |x| {
        let (sx, cx, sy, cy) = ((k * x[0]).sin(), (k * x[0]).cos(), (k * x[1]).sin(), (k * x[1]).cos());
        [k * cx * sy, k * sx * cy, 0.0]
    });
    let boundary = TrimmingBoundary::circle(ORIGIN, 1.0, KeepSide::Negative);
    let g = exact_grad.clone();
    let mut problem = ProblemDefinition::poisson();
    problem.source = Some(scalar(move |x| 2.0 * k * k * (k * x[0]).sin() * (k * x[1]).sin()));
    problem.neumann = Some(exact_flux_neumann(boundary.clone(), Arc::new(move |x| g(x))));
    problem.mean_constraint = Some(MeanConstraint::IntegralOf(exact_u.clone()));
    ManufacturedCase {
        kind: if distorted { CaseKind::Poisson2dDistorted } else { CaseKind::Poisson2d },
        dim: 2,
        lo: [-l / 2.0, -l / 2.0, 0.0],
        hi: [l / 2.0, l / 2.0, 0.0],
        distorted,
        boundary,
        problem,
        exact_u,
        exact_grad,
        exact_measure: PI,
        exact_boundary_measure: 2.0 * PI,
    }
}

/// Plate parameters: side, hole radius, far-field tension, material.
pub const PLATE_LENGTH: f64 = 4.0;
pub const PLATE_RADIUS: f64 = 1.0;
pub const PLATE_TENSION: f64 = 10.0;
pub const PLATE_MATERIAL: Material = Material { youngs_modulus: 1e5, poisson_ratio: 0.3 };

/// Cartesian Kirsch stresses `[sxx, syy, sxy]` around a hole of radius
/// `radius` under far-field tension `t` along x.
pub fn kirsch_stress(x: &Point, radius: f64, t: f64) -> [f64; 3] {
    let r = x[0].hypot(x[1]);
    let th = x[1].atan2(x[0]);
    let (a2, a4) = ((radius / r).powi(2), (radius / r).powi(4));
    let (c2, s2) = ((2.0 * th).cos(), (2.0 * th).sin());
    let srr = 0.5 * t * (1.0 - a2) + 0.5 * t * (1.0 - 4.0 * a2 + 3.0 * a4) * c2;
    let stt = 0.5 * t * (1.0 + a2) - 0.5 * t * (1.0 + 3.0 * a4) * c2;
    let srt = -0.5 * t * (1.0 + 2.0 * a2 - 3.0 * a4) * s2;
    let (c, s) = (th.cos(), th.sin());
    [
        srr * c * c + stt * s * s - 2.0 * srt * s * c,
        srr * s * s + stt * c * c + 2.0 * srt * s * c,
        (srr - stt) * s * c + srt * (c * c - s * s),
    ]
}

/// Plane-strain Kirsch displacement `(u_x, u_y)`.
pub fn kirsch_displacement(x: &Point, radius: f64, t: f64, m: Material) -> [f64; 2] {
    let (_, mu) = m.lame();
    let kappa = 3.0 - 4.0 * m.poisson_ratio;
    let r = x[0].hypot(x[1]);
    let th = x[1].atan2(x[0]);
    let (r2, r4) = (radius * radius, radius.powi(4));
    let c = t / (8.0 * mu);
    let ux = (kappa + 1.0) * r * th.cos() + 2.0 * r2 / r * ((1.0 + kappa) * th.cos() + (3.0 * th).cos())
        - 2.0 * r4 / r.powi(3) * (3.0 * th).cos();
    let uy = (kappa - 3.0) * r * th.sin() + 2.0 * r2 / r * ((1.0 - kappa) * th.sin() + (3.0 * th).sin())
        - 2.0 * r4 / r.powi(3) * (3.0 * th).sin();
    [c * ux, c * uy]
}

/// Displacement gradient `[[du_x/dx, du_x/dy], [du_y/dx, du_y/dy]]`.
pub fn kirsch_gradient(x: &Point, radius: f64, t: f64, m: Material) -> [[f64; 2]; 2] {
    let (_, mu) = m.lame();
    let kappa = 3.0 - 4.0 * m.poisson_ratio;
    let r = x[0].hypot(x[1]);
    let th = x[1].atan2(x[0]);
    let (r2, r4) = (radius * radius, radius.powi(4));
    let c = t / (8.0 * mu);
    let (ct, st, c3, s3) = (th.cos(), th.sin(), (3.0 * th).cos(), (3.0 * th).sin());
    let (a, b) = (kappa + 1.0, 1.0 + kappa);
    let fr = a * ct - 2.0 * r2 / (r * r) * (b * ct + c3) + 6.0 * r4 / r.powi(4) * c3;
    let ft = -a * r * st + 2.0 * r2 / r * (-b * st - 3.0 * s3) + 6.0 * r4 / r.powi(3) * s3;
    let (a, b) = (kappa - 3.0, 1.0 - kappa);
    let gr = a * st - 2.0 * r2 / (r * r) * (b * st + s3) + 6.0 * r4 / r.powi(4) * s3;
    let gt = a * r * ct + 2.0 * r2 / r * (b * ct + 3.0 * c3) - 6.0 * r4 / r.powi(3) * c3;
    let cart = |dr: f64, dt: f64| [c * (ct * dr - st / r * dt), c * (st * dr + ct / r * dt)];
    [cart(fr, ft), cart(gr, gt)]
}

/// Largest relative mismatch between the Kirsch stresses and the stresses
/// obtained from the displacement gradient through the plane-strain law.
pub fn kirsch_self_check(samples: usize, seed: u64) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (lambda, mu) = PLATE_MATERIAL.lame();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let r = PLATE_RADIUS * (1.0 + 3.0 * rng.random::<f64>());
        let th = 0.5 * PI * rng.random::<f64>();
        let x = [r * th.cos(), r * th.sin(), 0.0];
        let g = kirsch_gradient(&x, PLATE_RADIUS, PLATE_TENSION, PLATE_MATERIAL);
        let tr = g[0][0] + g[1][1];
        let from_u = [lambda * tr + 2.0 * mu * g[0][0], lambda * tr + 2.0 * mu * g[1][1], mu * (g[0][1] + g[1][0])];
        let s = kirsch_stress(&x, PLATE_RADIUS, PLATE_TENSION);
        let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..3 {
            worst = worst.max((from_u[i] - s[i]).abs() / scale);
        }
    }
    worst
}

/// Quarter plate `[0, L]^2` minus the disc of radius `R` at the origin.
/// Symmetry faces carry the exact normal displacement, the outer faces the
/// exact traction; the hole is traction free.
pub fn case_plate_with_hole() -> ManufacturedCase {
    let (radius, t, m) = (PLATE_RADIUS, PLATE_TENSION, PLATE_MATERIAL);
    let exact_u: Field = Arc::new(move |x| {
        let u = kirsch_displacement(x, radius, t, m);
        [u[0], u[1], 0.0]
    });
    let exact_grad: GradField = Arc::new(move |x| {
        let g = kirsch_gradient(x, radius, t, m);
        [[g[0][0], g[0][1], 0.0], [g[1][0], g[1][1], 0.0], [0.0; 3]]
    });
    let boundary = TrimmingBoundary::circle(ORIGIN, radius, KeepSide::Positive);
    let stress = Arc::new(move |x: &Point| {
        let s = kirsch_stress(x, radius, t);
        [[s[0], s[2], 0.0], [s[2], s[1], 0.0], [0.0; 3]]
    });
    let mut problem = ProblemDefinition::poisson();
    problem.pde = Pde::ElasticityPlaneStrain;
    problem.material = Some(m);
    problem.neumann = Some(exact_flux_neumann(boundary.clone(), stress));
    problem.dirichlet = vec![
        DirichletCondition { face: 0, component: Some(0), value: exact_u.clone() },
        DirichletCondition { face: 2, component: Some(1), value: exact_u.clone() },
    ];
    ManufacturedCase {
        kind: CaseKind::Plate,
        dim: 2,
        lo: ORIGIN,
        hi: [PLATE_LENGTH, PLATE_LENGTH, 0.0],
        distorted: false,
        boundary,
        problem,
        exact_u,
        exact_grad,
        exact_measure: PLATE_LENGTH * PLATE_LENGTH - 0.25 * PI * radius * radius,
        exact_boundary_measure: 0.5 * PI * radius,
    }
}

/// `u = x rho sin^2(pi r / R)` with `rho = |(x, y)|` on the unit cube
/// intersected with the ball of radius `R = 1`; Neumann data, mean fixed.
pub fn case_poisson_3d() -> ManufacturedCase {
    let big_r = 1.0;
    let w = PI / big_r;
    let exact_u = scalar(move |x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        x[0] * x[0].hypot(x[1]) * (w * r).sin().powi(2)
    });
    let exact_grad = scalar_grad(move |x| {
        let rho = x[0].hypot(x[1]);
        let r = (rho * rho + x[2] * x[2]).sqrt();
        let s = (w * r).sin().powi(2);
        let ds = w * (2.0 * w * r).sin();
        let g = x[0] * rho;
        let grad_g = if rho == 0.0 { [0.0; 3] } else { [rho + x[0] * x[0] / rho, x[0] * x[1] / rho, 0.0] };
        let radial = if r == 0.0 { 0.0 } else { g * ds / r };
        [s * grad_g[0] + radial * x[0], s * grad_g[1] + radial * x[1], radial * x[2]]
    });
    let laplacian = move |x: &Point| {
        let rho = x[0].hypot(x[1]);
        let r = (rho * rho + x[2] * x[2]).sqrt();
        if rho == 0.0 || r == 0.0 {
            return 0.0;
        }
        let s = (w * r).sin().powi(2);
        let ds = w * (2.0 * w * r).sin();
        let dds = 2.0 * w * w * (2.0 * w * r).cos();
        3.0 * x[0] * s / rho + x[0] * rho * (dds + 6.0 * ds / r)
    };
    let boundary = TrimmingBoundary::sphere(ORIGIN, big_r, KeepSide::Negative);
    let g = exact_grad.clone();
    let mut problem = ProblemDefinition::poisson();
    problem.source = Some(scalar(move |x| -laplacian(x)));
    problem.neumann = Some(exact_flux_neumann(boundary.clone(), Arc::new(move |x| g(x))));
    problem.mean_constraint = Some(MeanConstraint::IntegralOf(exact_u.clone()));
    ManufacturedCase {
        kind: CaseKind::Poisson3d,
        dim: 3,
        lo: ORIGIN,
        hi: [1.0; 3],
        distorted: false,
        boundary,
        problem,
        exact_u,
        exact_grad,
        exact_measure: PI / 6.0,
        exact_boundary_measure: 0.5 * PI,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(u: &Field, x: &Point, dim: usize, c: usize) -> Point {
        let h = 1e-5;
        let mut g = ORIGIN;
        for d in 0..dim {
            let (mut a, mut b) = (*x, *x);
            a[d] += h;
            b[d] -= h;
            g[d] = (u(&a)[c] - u(&b)[c]) / (2.0 * h);
        }
        g
    }

    #[test]
    fn poisson_2d_closed_forms() {
        let case = case_poisson_2d(false);
        let l = POISSON_2D_LENGTH;
        let f = case.problem.source.clone().unwrap();
        for x in [[0.3, -0.2, 0.0], [0.71, 0.05, 0.0], [-0.4, 0.6, 0.0]] {
            // -lap(u) = f and lap(u) / u = -8 pi^2 / L^2
            assert!((f(&x)[0] / (case.exact_u)(&x)[0] - 8.0 * PI * PI / (l * l)).abs() < 1e-12);
            let g = (case.exact_grad)(&x)[0];
            let fd = fd_grad(&case.exact_u, &x, 2, 0);
            assert!((g[0] - fd[0]).abs() < 1e-8 && (g[1] - fd[1]).abs() < 1e-8);
        }
        // flux through the circle vanishes at (R, 0)
        let g = case.problem.neumann.clone().unwrap();
        assert!(g(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], BoundaryPart::Trimmed)[0].abs() < 1e-15);
        assert!(case.pde_residual(1000, 3) < 1e-8);
    }

    #[test]
    fn kirsch_field() {
        let (r, t) = (PLATE_RADIUS, PLATE_TENSION);
        // hoop stress concentration at the top of the hole
        let s = kirsch_stress(&[0.0, r, 0.0], r, t);
        assert!((s[0] - 3.0 * t).abs() < 1e-12);
        // traction free hole
        for th in [0.1, 0.7, 1.3] {
            let x = [r * f64::cos(th), r * f64::sin(th), 0.0];
            let s = kirsch_stress(&x, r, t);
            let n = [x[0] / r, x[1] / r];
            assert!((s[0] * n[0] + s[2] * n[1]).abs() < 1e-12);
            assert!((s[2] * n[0] + s[1] * n[1]).abs() < 1e-12);
        }
        // far field
        let s = kirsch_stress(&[1e6, 0.0, 0.0], r, t);
        assert!((s[0] - t).abs() < 1e-9 && s[1].abs() < 1e-9);
        assert!(kirsch_self_check(100, 11) < 1e-8);
        // the gradient is the derivative of the displacement
        let case = case_plate_with_hole();
        for x in [[1.5, 0.4, 0.0], [0.3, 2.2, 0.0], [3.1, 3.7, 0.0]] {
            let g = (case.exact_grad)(&x);
            for c in 0..2 {
                let fd = fd_grad(&case.exact_u, &x, 2, c);
                for d in 0..2 {
                    assert!((g[c][d] - fd[d]).abs() < 1e-9 * (1.0 + g[c][d].abs()));
                }
            }
        }
        // symmetry planes
        let u = kirsch_displacement(&[0.0, 2.0, 0.0], r, t, PLATE_MATERIAL);
        assert!(u[0].abs() < 1e-15);
        let u = kirsch_displacement(&[2.0, 0.0, 0.0], r, t, PLATE_MATERIAL);
        assert!(u[1].abs() < 1e-15);
        assert!(case.pde_residual(500, 5) < 1e-8 * PLATE_TENSION);
    }

    #[test]
    fn poisson_3d_closed_forms() {
        let case = case_poisson_3d();
        let u = case.exact_u.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            // on the sphere u and its radial derivative vanish
            let d = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let x = [d[0] / n, d[1] / n, d[2] / n];
            assert!(u(&x)[0].abs() < 1e-15);
            let g = (case.exact_grad)(&x)[0];
            assert!((g[0] * x[0] + g[1] * x[1] + g[2] * x[2]).abs() < 1e-14);
            // the face x = 0
            assert!(u(&[0.0, d[1], d[2]])[0] == 0.0);
            let y = [0.5 * d[0] + 0.1, 0.5 * d[1] + 0.1, 0.5 * d[2]];
            let fd = fd_grad(&u, &y, 3, 0);
            let g = (case.exact_grad)(&y)[0];
            for k in 0..3 {
                assert!((g[k] - fd[k]).abs() < 1e-8);
            }
        }
        assert!(case.pde_residual(1000, 9) < 1e-7);
    }

    #[test]
    fn case_names_round_trip() {
        for c in CaseKind::ALL {
            assert_eq!(c.name().parse::<CaseKind>().unwrap(), c);
        }
        assert!("circle".parse::<CaseKind>().is_err());
    }
}
