//! Shared fixtures for the criterion benchmarks.

use trimmed_iga::analysis::{discretize, CaseKind, ManufacturedCase, RunSettings};
use trimmed_iga::assembly::Discretization;
use trimmed_iga::Point;

/// Circle benchmark discretized with `p = r` on `elements` spans per direction.
pub fn circle(p: usize, elements: usize) -> (ManufacturedCase, Discretization) {
    let case = CaseKind::Poisson2d.build();
    let disc = discretize(&case, elements, &RunSettings::new(p, p)).expect("circle discretizes");
    (case, disc)
}

/// Deterministic low-discrepancy points in the unit square.
pub fn sample_points(n: usize) -> Vec<Point> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    (0..n).map(|i| [(i as f64 + 0.5) / n as f64, (i as f64 * g).fract(), 0.0]).collect()
}
