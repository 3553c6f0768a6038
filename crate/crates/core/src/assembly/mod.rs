//! Galerkin systems for Poisson and linear elasticity on trimmed patches.

mod constraints;
mod discretization;
mod forms;
mod problem;

#[cfg(test)]
mod tests;

pub use constraints::{apply_dirichlet, apply_mean_constraint};
pub use discretization::{Discretization, VolumePoint};
pub use forms::assemble;
pub(crate) use forms::check_problem;
pub use problem::{
    BoundaryPart, DirichletCondition, Field, Material, MeanConstraint, NeumannField, Pde,
    ProblemDefinition,
};

use crate::error::Result;
use crate::sparse::SparseMatrix;

/// Optional constraint `c . x = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub row: Vec<f64>,
    pub target: f64,
}

/// Assembled symmetric system over the free unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub constraint: Option<ConstraintRow>,
    /// Eliminated unknowns and their values, sorted by unknown.
    pub dirichlet: Vec<(usize, f64)>,
    /// Unknown index of each system row.
    pub free: Vec<usize>,
    /// `(global function, component)` of each system row.
    pub owners: Vec<(usize, usize)>,
    /// Number of unknowns before elimination.
    pub n_full: usize,
    pub components: usize,
}

impl LinearSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// All unknowns from a solution of the reduced system.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n_full];
        for (&i, &v) in self.free.iter().zip(x) {
            full[i] = v;
        }
        for &(i, v) in &self.dirichlet {
            full[i] = v;
        }
        full
    }
}

/// Assemble and apply whichever of the mean constraint and Dirichlet data
/// the problem defines.
pub fn assemble_problem(disc: &Discretization, problem: &ProblemDefinition) -> Result<LinearSystem> {
    if problem.mean_constraint.is_some() && !problem.dirichlet.is_empty() {
        return Err(crate::error::Error::ConstraintWithDirichlet);
    }
    let system = assemble(disc, problem)?;
    if problem.mean_constraint.is_some() {
        apply_mean_constraint(system, disc, problem)
    } else {
        apply_dirichlet(system, disc, problem)
    }
}
