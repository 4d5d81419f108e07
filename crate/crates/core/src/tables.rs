//! Accuracy tables and per-point curve data for the benchmark problems.
//!
//! Every cell is computed independently (in parallel); a failed solve leaves
//! its cells empty and is recorded in [`Table::failures`], so one diverging
//! order never aborts a sweep.

use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::ShootingOptions;
use crate::diagnostics::{defect, error, reference_solution, DefectReport, Profile, Reference, DEFAULT_REFERENCE_TOL};
use crate::error::{Error, Result};
use crate::factor::Derivatives;
use crate::problems::{solve_problem_with, Benchmark, ProblemSpec, Solution};
use crate::rootapprox::defect_of_root;

/// Rows of numbers with named columns. The first column is the order `k`
/// (tables) or the native variable (curves).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// One line per cell that could not be computed.
    pub failures: Vec<String>,
}

/// Knobs shared by every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    /// Overrides the problem's default grid size.
    pub grid_points: Option<usize>,
    pub shooting: ShootingOptions,
}

/// Published table layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableName {
    Table1,
    Table2,
    Table3,
    Table4,
    Table5,
}

impl TableName {
    pub const ALL: [TableName; 5] = [Self::Table1, Self::Table2, Self::Table3, Self::Table4, Self::Table5];

    pub fn name(self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table2 => "table2",
            Self::Table3 => "table3",
            Self::Table4 => "table4",
            Self::Table5 => "table5",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown table '{name}' (expected table1..table5)")))
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::Table1 => "boundary_layer, eps = 0.1, k = 8..17: D, Delta, delta",
            Self::Table2 => "boundary_layer, eps = 1 and 10, k = 4..7: D, Delta, delta",
            Self::Table3 => "gp_vortex, k = 2..6: D of factor and root approximants",
            Self::Table4 => "stokes_oseen, k = 4..12: D for eps = 0.1, 1, 10",
            Self::Table5 => "strongly_singular, odd k = 3..11: D for eps = 0.1, 1, 10",
        }
    }

    pub fn compute(self, opts: &SweepOptions) -> Table {
        let mut t = match self {
            Self::Table1 => sweep(Benchmark::BoundaryLayer, &[0.1], None, &(8..=17).collect::<Vec<_>>(), true, opts),
            Self::Table2 => sweep(Benchmark::BoundaryLayer, &[1.0, 10.0], None, &[4, 5, 6, 7], true, opts),
            Self::Table3 => gp_table(opts),
            Self::Table4 => sweep(Benchmark::StokesOseen, &[0.1, 1.0, 10.0], None, &(4..=12).collect::<Vec<_>>(), false, opts),
            Self::Table5 => sweep(Benchmark::StronglySingular, &[0.1, 1.0, 10.0], None, &[3, 5, 7, 9, 11], false, opts),
        };
        t.name = self.name().into();
        t
    }
}

/// The true solution: closed form where known, numeric otherwise.
pub enum Truth {
    Exact(ProblemSpec),
    Numeric(Reference),
}

impl Truth {
    pub fn for_problem(spec: &ProblemSpec) -> Result<Self> {
        if spec.exact(spec.domain().0).is_some() {
            Ok(Self::Exact(*spec))
        } else {
            reference_solution(spec, DEFAULT_REFERENCE_TOL).map(Self::Numeric)
        }
    }
}

impl Profile for Truth {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        match self {
            Self::Exact(p) => p.exact(s).ok_or_else(|| Error::Reference(format!("{} has no closed form", p.name()))),
            Self::Numeric(r) => r.eval(s),
        }
    }
}

fn with_grid(spec: ProblemSpec, opts: &SweepOptions) -> Result<ProblemSpec> {
    match opts.grid_points {
        Some(n) => spec.with_grid_points(n),
        None => Ok(spec),
    }
}

fn build_spec(b: Benchmark, eps: f64, p0: Option<f64>, opts: &SweepOptions) -> Result<ProblemSpec> {
    let mut spec = ProblemSpec::new(b, eps)?;
    if let Some(p0) = p0 {
        spec = spec.with_p0(p0)?;
    }
    with_grid(spec, opts)
}

fn label(eps: f64) -> String {
    format!("eps={eps}")
}

/// Solves and measures one approximant; errors carry the problem, order and ε.
pub fn measure(
    spec: &ProblemSpec,
    k: usize,
    truth: Option<&Truth>,
    opts: &ShootingOptions,
) -> std::result::Result<(Solution, DefectReport), String> {
    let context = |e: Error| format!("{} k={k} eps={}: {e}", spec.name(), spec.epsilon);
    let sol = solve_problem_with(spec, k, opts).map_err(context)?;
    let grid = spec.grid();
    let report = match truth {
        Some(t) => error(spec, &sol, t, &grid, k),
        None => defect(spec, &sol, &grid, k),
    };
    Ok((sol, report))
}

/// `D` per ε (and `Δ`, `δ` when `errors` is set) for each order.
pub fn sweep(
    benchmark: Benchmark,
    epsilons: &[f64],
    p0: Option<f64>,
    orders: &[usize],
    errors: bool,
    opts: &SweepOptions,
) -> Table {
    let mut columns = vec!["k".to_string()];
    let many = epsilons.len() > 1;
    for &e in epsilons {
        let suffix = if many { format!("({})", label(e)) } else { String::new() };
        columns.push(format!("D{suffix}"));
        if errors {
            columns.push(format!("Delta{suffix}"));
            columns.push(format!("delta{suffix}"));
        }
    }
    let mut failures = Vec::new();
    let specs: Vec<Option<(ProblemSpec, Option<Truth>)>> = epsilons
        .par_iter()
        .map(|&e| {
            let spec = build_spec(benchmark, e, p0, opts).map_err(|err| format!("{}: {err}", label(e)))?;
            let truth = if errors {
                Some(Truth::for_problem(&spec).map_err(|err| format!("{} {}: {err}", spec.name(), label(e)))?)
            } else {
                None
            };
            Ok((spec, truth))
        })
        .collect::<Vec<std::result::Result<_, String>>>()
        .into_iter()
        .map(|r| r.map_err(|m| failures.push(m)).ok())
        .collect();
    let jobs: Vec<(usize, usize)> = orders.iter().flat_map(|&k| (0..epsilons.len()).map(move |i| (k, i))).collect();
    let results: Vec<Option<std::result::Result<DefectReport, String>>> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let (spec, truth) = specs[i].as_ref()?;
            Some(measure(spec, k, truth.as_ref(), &opts.shooting).map(|(_, r)| r))
        })
        .collect();
    let width = if errors { 3 } else { 1 };
    let mut rows = Vec::with_capacity(orders.len());
    let mut it = results.into_iter();
    for &k in orders {
        let mut row = vec![Some(k as f64)];
        for _ in epsilons {
            match it.next().flatten() {
                Some(Ok(r)) => {
                    row.push(Some(r.max_defect));
                    if errors {
                        row.push(r.max_error);
                        row.push(r.ratio);
                    }
                }
                Some(Err(m)) => {
                    failures.push(m);
                    row.extend(std::iter::repeat_n(None, width));
                }
                None => row.extend(std::iter::repeat_n(None, width)),
            }
        }
        rows.push(row);
    }
    Table { name: format!("{}-sweep", benchmark.name()), columns, rows, failures }
}

fn gp_table(opts: &SweepOptions) -> Table {
    let columns = vec!["k".into(), "D_phi".into(), "D_root".into()];
    let mut failures = Vec::new();
    let spec = match build_spec(Benchmark::GpVortex, 1.0, None, opts) {
        Ok(s) => s,
        Err(e) => {
            return Table { name: "table3".into(), columns, rows: Vec::new(), failures: vec![e.to_string()] };
        }
    };
    let grid = spec.grid();
    let cells: Vec<(std::result::Result<f64, String>, std::result::Result<f64, String>)> = (2..=6usize)
        .into_par_iter()
        .map(|k| {
            let phi = measure(&spec, k, None, &opts.shooting).map(|(_, r)| r.max_defect);
            let root = defect_of_root(k, &grid).map(|r| r.max_defect).map_err(|e| format!("root k={k}: {e}"));
            (phi, root)
        })
        .collect();
    let rows = cells
        .into_iter()
        .zip(2..=6usize)
        .map(|((phi, root), k)| {
            let mut cell = |r: std::result::Result<f64, String>| r.map_err(|m| failures.push(m)).ok();
            vec![Some(k as f64), cell(phi), cell(root)]
        })
        .collect();
    Table { name: "table3".into(), columns, rows, failures }
}

/// Quantity plotted by [`curve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    Defect,
    Error,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Self::Defect => "defect",
            Self::Error => "error",
        }
    }
}

/// Pointwise defect or error of several orders on the problem's grid:
/// columns `x, <metric>_k<k>...`.
pub fn curve(spec: &ProblemSpec, orders: &[usize], metric: Metric, opts: &SweepOptions) -> Result<Table> {
    if orders.is_empty() {
        return Err(Error::InvalidParameter("no orders given".into()));
    }
    let spec = with_grid(*spec, opts)?;
    let truth = match metric {
        Metric::Defect => None,
        Metric::Error => Some(Truth::for_problem(&spec)?),
    };
    let grid = spec.grid();
    let results: Vec<std::result::Result<DefectReport, String>> = orders
        .par_iter()
        .map(|&k| measure(&spec, k, truth.as_ref(), &opts.shooting).map(|(_, r)| r))
        .collect();
    let mut columns = vec![spec.benchmark.variable().to_string()];
    columns.extend(orders.iter().map(|k| format!("{}_k{k}", metric.name())));
    let mut failures = Vec::new();
    let mut series: Vec<Vec<Option<f64>>> = Vec::with_capacity(orders.len());
    for r in results {
        let mut col = vec![None; grid.len()];
        match r {
            Ok(report) => {
                let values = match metric {
                    Metric::Defect => Some(&report.defect_values),
                    Metric::Error => report.error_values.as_ref(),
                };
                if let Some(values) = values {
                    // Failed points were dropped from the report; realign by position.
                    let mut j = 0;
                    for (i, &s) in grid.iter().enumerate() {
                        if report.grid.get(j) == Some(&s) {
                            col[i] = Some(values[j]);
                            j += 1;
                        }
                    }
                }
                failures.extend(report.failed_points.iter().map(|s| format!("k={}: evaluation failed at {s}", report.order)));
            }
            Err(m) => failures.push(m),
        }
        series.push(col);
    }
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &s)| std::iter::once(Some(s)).chain(series.iter().map(|c| c[i])).collect())
        .collect();
    Ok(Table { name: format!("{}-{}", spec.name(), metric.name()), columns, rows, failures })
}
