use super::{error_norms, CaseKind, ManufacturedCase};
use crate::assembly::{assemble_problem, Discretization};
use crate::error::Result;
use crate::reparam::ReparamOptions;
use crate::solver::{condition_number, solve, ConditionMethod, ConditionMode};
use crate::splines::TensorBSplineSpace;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Instant;

/// Exact CSV header of convergence rows.
pub const CSV_HEADER: &str = "case,p,r,ht,h,l2,h1,h1_cut,h1_int,area_err,bnd_err,cond_raw,cond_scaled,iters,secs";

/// Discretization parameters of one sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub p: usize,
    pub r: usize,
    pub ht_divisions: usize,
    /// Extra Gauss points per direction on top of `p + 1`.
    pub quad_boost: usize,
    pub geo_precision: f64,
    /// Whether condition numbers are computed (the most expensive column).
    pub condition: bool,
    pub condition_method: ConditionMethod,
    /// Record wall time; otherwise `secs` is zero and output is reproducible.
    pub timing: bool,
}

impl RunSettings {
    pub fn new(p: usize, r: usize) -> Self {
        Self {
            p,
            r,
            ht_divisions: 1,
            quad_boost: 0,
            geo_precision: 0.0,
            condition: false,
            condition_method: ConditionMethod::Auto,
            timing: false,
        }
    }

    pub fn reparam_options(&self) -> ReparamOptions {
        let mut o = ReparamOptions::new(self.r);
        o.ht_divisions = self.ht_divisions;
        o.quad_points = self.p.max(self.r) + 1 + self.quad_boost;
        o.geo_precision = self.geo_precision;
        o
    }
}

/// One row of a convergence study. Failed runs keep their key and the message.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub case: String,
    pub p: usize,
    pub r: usize,
    pub ht: usize,
    /// Elements per direction.
    pub elements: usize,
    pub h: f64,
    pub dofs: usize,
    pub l2: f64,
    pub h1: f64,
    pub h1_cut: f64,
    pub h1_int: f64,
    pub area_err: f64,
    pub bnd_err: f64,
    pub cond_raw: f64,
    pub cond_scaled: f64,
    pub iters: usize,
    pub converged: bool,
    pub secs: f64,
    pub failure: Option<String>,
}

impl RunRow {
    fn empty(case: &ManufacturedCase, s: &RunSettings, elements: usize) -> Self {
        Self {
            case: case.name().to_string(),
            p: s.p,
            r: s.r,
            ht: s.ht_divisions,
            elements,
            h: case.length() / elements as f64,
            dofs: 0,
            l2: f64::NAN,
            h1: f64::NAN,
            h1_cut: f64::NAN,
            h1_int: f64::NAN,
            area_err: f64::NAN,
            bnd_err: f64::NAN,
            cond_raw: f64::NAN,
            cond_scaled: f64::NAN,
            iters: 0,
            converged: false,
            secs: 0.0,
            failure: None,
        }
    }

    /// Value of a rate column.
    pub fn column(&self, c: Column) -> f64 {
        match c {
            Column::L2 => self.l2,
            Column::H1 => self.h1,
            Column::H1Cut => self.h1_cut,
            Column::H1Int => self.h1_int,
            Column::AreaErr => self.area_err,
            Column::BndErr => self.bnd_err,
            Column::CondRaw => self.cond_raw,
            Column::CondScaled => self.cond_scaled,
            Column::Iters => self.iters as f64,
        }
    }

    /// CSV record matching [`CSV_HEADER`].
    pub fn csv(&self) -> String {
        let e = |v: f64| format!("{v:.16e}");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.case,
            self.p,
            self.r,
            self.ht,
            e(self.h),
            e(self.l2),
            e(self.h1),
            e(self.h1_cut),
            e(self.h1_int),
            e(self.area_err),
            e(self.bnd_err),
            e(self.cond_raw),
            e(self.cond_scaled),
            self.iters,
            e(self.secs)
        )
    }
}

/// Columns a rate can be fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    L2,
    H1,
    H1Cut,
    H1Int,
    AreaErr,
    BndErr,
    CondRaw,
    CondScaled,
    Iters,
}

impl Column {
    pub const ALL: [Column; 9] = [
        Column::L2,
        Column::H1,
        Column::H1Cut,
        Column::H1Int,
        Column::AreaErr,
        Column::BndErr,
        Column::CondRaw,
        Column::CondScaled,
        Column::Iters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::L2 => "l2",
            Column::H1 => "h1",
            Column::H1Cut => "h1_cut",
            Column::H1Int => "h1_int",
            Column::AreaErr => "area_err",
            Column::BndErr => "bnd_err",
            Column::CondRaw => "cond_raw",
            Column::CondScaled => "cond_scaled",
            Column::Iters => "iters",
        }
    }

    /// Error columns are subject to the precision-floor filter.
    fn is_error(self) -> bool {
        !matches!(self, Column::CondRaw | Column::CondScaled | Column::Iters)
    }
}

/// Build the discretization of a case on `elements` spans per direction.
pub fn discretize(case: &ManufacturedCase, elements: usize, s: &RunSettings) -> Result<Discretization> {
    let space = TensorBSplineSpace::uniform(case.dim, s.p, elements);
    Discretization::new(space, case.map(), case.boundary.clone(), &s.reparam_options())
}

/// Assemble, solve and measure one mesh level.
pub fn run_case(case: &ManufacturedCase, elements: usize, s: &RunSettings) -> Result<RunRow> {
    let start = Instant::now();
    let mut row = RunRow::empty(case, s, elements);
    let disc = discretize(case, elements, s)?;
    let system = assemble_problem(&disc, &case.problem)?;
    row.dofs = system.len();
    let rep = solve(&system)?;
    row.iters = rep.iterations;
    row.converged = rep.converged;
    let norms = error_norms(&disc, &rep.solution, case)?;
    row.l2 = norms.l2;
    row.h1 = norms.h1;
    row.h1_cut = norms.h1_cut;
    row.h1_int = norms.h1_int;
    let (area, bnd) = disc.measures()?;
    row.area_err = (area - case.exact_measure).abs();
    row.bnd_err = (bnd - case.exact_boundary_measure).abs();
    if s.condition {
        let c = system.constraint.as_ref().map(|c| c.row.as_slice());
        row.cond_raw = condition_number(&system.matrix, ConditionMode::Raw, c, s.condition_method)?;
        row.cond_scaled = condition_number(&system.matrix, ConditionMode::Scaled, c, s.condition_method)?;
    }
    if s.timing {
        row.secs = start.elapsed().as_secs_f64();
    }
    Ok(row)
}

/// Rows of one parameter set over a list of mesh sizes, with fitted rates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub settings: RunSettings,
    pub rows: Vec<RunRow>,
}

impl ConvergenceRecord {
    /// Rate of a column over the finest three usable levels.
    pub fn slope(&self, column: Column) -> Option<f64> {
        let floor = if column.is_error() { 10.0 * self.settings.geo_precision } else { 0.0 };
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.failure.is_none())
            .map(|r| (r.h, r.column(column)))
            .filter(|&(_, v)| v.is_finite() && v > floor)
            .collect();
        let tail = &pts[pts.len().saturating_sub(3)..];
        fit_slope(tail)
    }

    /// Rate over an explicit set of levels (by elements per direction).
    pub fn slope_over(&self, column: Column, elements: &[usize]) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.failure.is_none() && elements.contains(&r.elements))
            .map(|r| (r.h, r.column(column)))
            .filter(|&(_, v)| v.is_finite() && v > 0.0)
            .collect();
        fit_slope(&pts)
    }
}

/// Least-squares slope of `log v` against `log h`; positive for errors
/// that shrink under refinement.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Run every parameter set on every mesh size. Failures are kept as rows.
pub fn convergence_study(kind: CaseKind, settings: &[RunSettings], elements: &[usize]) -> Vec<ConvergenceRecord> {
    let case = kind.build();
    let jobs: Vec<(usize, usize)> =
        (0..settings.len()).flat_map(|i| elements.iter().map(move |&n| (i, n))).collect();
    let rows: Vec<RunRow> = jobs
        .par_iter()
        .map(|&(i, n)| {
            let s = &settings[i];
            run_case(&case, n, s).unwrap_or_else(|e| {
                let mut row = RunRow::empty(&case, s, n);
                row.failure = Some(e.to_string());
                row
            })
        })
        .collect();
    let mut it = rows.into_iter();
    settings
        .iter()
        .map(|s| ConvergenceRecord { settings: *s, rows: it.by_ref().take(elements.len()).collect() })
        .collect()
}

pub fn write_csv<W: Write>(records: &[ConvergenceRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for rec in records {
        for row in &rec.rows {
            writeln!(out, "{}", row.csv())?;
        }
    }
    Ok(())
}

/// Plain-text table of fitted rates and failures.
pub fn rate_summary(records: &[ConvergenceRecord]) -> String {
    let mut s = String::new();
    for rec in records {
        let st = &rec.settings;
        let case = rec.rows.first().map(|r| r.case.as_str()).unwrap_or("?");
        let _ = writeln!(s, "{case} p={} r={} ht={} quad_boost={} geo_precision={:e}", st.p, st.r, st.ht_divisions, st.quad_boost, st.geo_precision);
        for c in Column::ALL {
            match rec.slope(c) {
                Some(v) => {
                    let _ = writeln!(s, "  {:<12}{v:>8.3}", c.name());
                }
                None => {
                    let _ = writeln!(s, "  {:<12}{:>8}", c.name(), "-");
                }
            }
        }
        for row in rec.rows.iter().filter(|r| r.failure.is_some()) {
            let _ = writeln!(s, "  failed at {} elements: {}", row.elements, row.failure.as_deref().unwrap_or(""));
        }
    }
    s
}
