use crate::point::Point;
use std::fmt;
use std::sync::Arc;

/// Partial differential equation being discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pde {
    Poisson,
    ElasticityPlaneStrain,
    Elasticity3d,
}

impl Pde {
    /// Number of unknowns per basis function for a given spatial dimension.
    pub fn components(self, dim: usize) -> usize {
        match self {
            Pde::Poisson => 1,
            _ => dim,
        }
    }
}

/// Isotropic linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Material {
    /// Lamé parameters `(lambda, mu)`.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
    }
}

/// Where a boundary quadrature point lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPart {
    /// On the approximate trimming boundary.
    Trimmed,
    /// On face `2 * axis + side` of the parametric patch.
    BoxFace(usize),
}

/// Vector field of physical position; scalar fields use component 0.
pub type Field = Arc<dyn Fn(&Point) -> [f64; 3] + Send + Sync>;

/// Neumann datum as a function of the physical point, the unit outward
/// normal of the discrete boundary and the boundary part.
pub type NeumannField = Arc<dyn Fn(&Point, &Point, BoundaryPart) -> [f64; 3] + Send + Sync>;

/// Strongly imposed trace on one face of the parametric patch.
#[derive(Clone)]
pub struct DirichletCondition {
    /// Patch face `2 * axis + side`.
    pub face: usize,
    /// Constrained component, or all components when `None`.
    pub component: Option<usize>,
    pub value: Field,
}

/// How the mean-value constraint target is obtained.
#[derive(Clone)]
pub enum MeanConstraint {
    /// Fixed value of `int u`.
    Target(f64),
    /// `int u = int u_exact`, integrated with the assembly quadrature.
    IntegralOf(Field),
}

/// Weak problem: find `u` with `a(u, v) = int f v + int g v`.
#[derive(Clone)]
pub struct ProblemDefinition {
    pub pde: Pde,
    /// Right-hand side `f` of `-div(...) = f`.
    pub source: Option<Field>,
    pub neumann: Option<NeumannField>,
    pub dirichlet: Vec<DirichletCondition>,
    pub material: Option<Material>,
    pub mean_constraint: Option<MeanConstraint>,
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("pde", &self.pde)
            .field("source", &self.source.is_some())
            .field("neumann", &self.neumann.is_some())
            .field("dirichlet_faces", &self.dirichlet.iter().map(|d| (d.face, d.component)).collect::<Vec<_>>())
            .field("material", &self.material)
            .field("mean_constraint", &self.mean_constraint.is_some())
            .finish()
    }
}

impl ProblemDefinition {
    pub fn poisson() -> Self {
        Self {
            pde: Pde::Poisson,
            source: None,
            neumann: None,
            dirichlet: Vec::new(),
            material: None,
            mean_constraint: None,
        }
    }
}
