//! Manufactured benchmarks, error norms, Monte-Carlo oracles and rate fitting.

mod cases;
mod norms;
mod oracle;
mod study;

#[cfg(test)]
mod tests;

pub use cases::{
    case_plate_with_hole, case_poisson_2d, case_poisson_3d, kirsch_displacement, kirsch_gradient,
    kirsch_self_check, kirsch_stress, CaseKind, GradField, ManufacturedCase, PLATE_LENGTH, PLATE_MATERIAL,
    PLATE_RADIUS, PLATE_TENSION, POISSON_2D_LENGTH,
};
pub use norms::{error_norms, evaluate_solution, ErrorNorms};
pub use oracle::{oracle_measure, MeasureEstimate};
pub use study::{
    convergence_study, discretize, fit_slope, rate_summary, run_case, write_csv, Column, ConvergenceRecord,
    RunRow, RunSettings, CSV_HEADER,
};
