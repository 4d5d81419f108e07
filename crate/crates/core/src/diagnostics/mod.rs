//! Accuracy measures for approximate solutions.
//!
//! The defect of an approximation `y*` is `|E[y*](x)|`, the residual of the
//! native equation; `D` is its maximum over the grid. When the true solution
//! is available (closed form or [`reference_solution`]) the error
//! `|y* - y|`, its maximum `Δ`, and the ratio `δ = Δ / D` are reported too.

mod reference;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::factor::Derivatives;
use crate::problems::ProblemSpec;

pub use reference::{reference_solution, Reference, DEFAULT_REFERENCE_TOL};

/// Anything that can be evaluated with two derivatives in a problem's native variable.
pub trait Profile: Sync {
    fn eval(&self, s: f64) -> Result<Derivatives>;
}

/// Pointwise and maximal defect, optionally with errors against a reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    /// Grid points where the approximation could be evaluated.
    pub grid: Vec<f64>,
    pub defect_values: Vec<f64>,
    pub error_values: Option<Vec<f64>>,
    /// `D`.
    pub max_defect: f64,
    /// Location of `D`.
    pub argmax_defect: f64,
    /// `Δ`.
    pub max_error: Option<f64>,
    /// `δ = Δ / D`.
    pub ratio: Option<f64>,
    /// Grid points skipped because evaluation failed there.
    pub failed_points: Vec<f64>,
    pub order: usize,
    pub epsilon: f64,
}

impl DefectReport {
    /// Number of grid points where evaluation failed.
    pub fn warnings(&self) -> usize {
        self.failed_points.len()
    }
}

/// Maximal defect, or `None` if evaluation fails anywhere on the grid.
pub fn max_defect(spec: &ProblemSpec, f: &dyn Profile, grid: &[f64]) -> Option<f64> {
    let mut m = 0.0f64;
    for &s in grid {
        let r = spec.residual(s, f.eval(s).ok()?).abs();
        if !r.is_finite() {
            return None;
        }
        m = m.max(r);
    }
    Some(m)
}

/// Defect of `f` on `grid`. Points where `f` cannot be evaluated are skipped and listed.
pub fn defect(spec: &ProblemSpec, f: &dyn Profile, grid: &[f64], order: usize) -> DefectReport {
    let pts: Vec<(f64, Option<f64>)> = grid
        .par_iter()
        .map(|&s| {
            let v = f
                .eval(s)
                .ok()
                .map(|d| spec.residual(s, d).abs())
                .filter(|r| r.is_finite());
            (s, v)
        })
        .collect();
    let mut report = DefectReport {
        grid: Vec::with_capacity(pts.len()),
        defect_values: Vec::with_capacity(pts.len()),
        error_values: None,
        max_defect: 0.0,
        argmax_defect: f64::NAN,
        max_error: None,
        ratio: None,
        failed_points: Vec::new(),
        order,
        epsilon: spec.epsilon,
    };
    for (s, v) in pts {
        match v {
            Some(r) => {
                if report.argmax_defect.is_nan() || r > report.max_defect {
                    report.max_defect = r;
                    report.argmax_defect = s;
                }
                report.grid.push(s);
                report.defect_values.push(r);
            }
            None => report.failed_points.push(s),
        }
    }
    report
}

/// Defect plus the deviation from `reference` on `grid`.
pub fn error(
    spec: &ProblemSpec,
    f: &dyn Profile,
    reference: &dyn Profile,
    grid: &[f64],
    order: usize,
) -> DefectReport {
    let mut report = defect(spec, f, grid, order);
    let errs: Vec<Option<f64>> = report
        .grid
        .par_iter()
        .map(|&s| {
            let a = f.eval(s).ok()?.value;
            let b = reference.eval(s).ok()?.value;
            Some((a - b).abs()).filter(|e| e.is_finite())
        })
        .collect();
    if errs.iter().all(Option::is_some) {
        let errs: Vec<f64> = errs.into_iter().flatten().collect();
        let max = errs.iter().cloned().fold(0.0, f64::max);
        report.max_error = Some(max);
        report.ratio = (report.max_defect > 0.0).then(|| max / report.max_defect);
        report.error_values = Some(errs);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Benchmark, Exact};

    struct Shifted<'a>(&'a ProblemSpec, f64);

    impl Profile for Shifted<'_> {
        fn eval(&self, s: f64) -> Result<Derivatives> {
            let mut d = self.0.exact(s).unwrap();
            d.value += self.1;
            Ok(d)
        }
    }

    #[test]
    fn exact_solution_has_zero_defect_and_error() {
        let p = ProblemSpec::new(Benchmark::Kink, 1.0).unwrap();
        let r = error(&p, &Exact(&p), &Exact(&p), &p.grid(), 0);
        assert!(r.max_defect < 1e-10);
        assert_eq!(r.max_error, Some(0.0));
        assert!(r.failed_points.is_empty());
    }

    #[test]
    fn ratio_is_error_over_defect() {
        let p = ProblemSpec::new(Benchmark::LinearSingular, 1.0).unwrap();
        let r = error(&p, &Shifted(&p, 0.01), &Exact(&p), &p.grid(), 0);
        let d = r.max_defect;
        assert!((d - 0.01).abs() < 1e-12);
        assert!((r.max_error.unwrap() - 0.01).abs() < 1e-12);
        assert!((r.ratio.unwrap() - 1.0).abs() < 1e-9);
        assert!(r.max_error.unwrap() <= r.ratio.unwrap() * d * (1.0 + 1e-12));
    }

    struct Failing;

    impl Profile for Failing {
        fn eval(&self, s: f64) -> Result<Derivatives> {
            if s > 0.5 {
                Err(crate::Error::BranchCut { x: s })
            } else {
                Ok(Derivatives { value: 0.0, first: 0.0, second: 0.0 })
            }
        }
    }

    #[test]
    fn failed_points_are_excluded() {
        let p = ProblemSpec::new(Benchmark::BoundaryLayer, 1.0)
            .unwrap()
            .with_grid_points(11)
            .unwrap();
        let r = defect(&p, &Failing, &p.grid(), 0);
        assert_eq!(r.warnings(), 5);
        assert_eq!(r.grid.len(), 6);
        assert!(max_defect(&p, &Failing, &p.grid()).is_none());
    }
}
