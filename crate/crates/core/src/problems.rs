//! The benchmark problems.
//!
//! Each problem is solved in a working variable in which the solution has a
//! convenient expansion about zero; [`Solution`] maps back to the native
//! variable through the chain rule.
//!
//! | name | native equation | working variable |
//! |---|---|---|
//! | `linear_singular` | `ε y'' + 2y' + y/ε = 0`, `y(0)=1`, `y'(0)=-1/ε` | `x = t` |
//! | `carrier_transfer` | `(εy + t) y' + y - 1 = 0`, `y(0)=2` | `x = t/ε`, `z = x + y` |
//! | `logistic` | `ε p' = p(1 - p)`, `p(0)=p_0` | `x = e^{-t/ε}` |
//! | `kink` | `(ε/2) φ'' + φ - φ³ = 0`, `φ(±∞) = ±1` | `z = e^{2x/√ε}`, `y = 2 + φ` |
//! | `bell` | `(ε/2) φ'' - φ + φ³ = 0`, `φ(±∞) = 0` | `z = e^{√(2/ε) x}` |
//! | `boundary_layer` | `ε y'' + x y' - x y = 0`, `y(0)=0`, `y(1)=e` | `z = y e^{-x}` |
//! | `gp_vortex` | `φ'' + φ'/r - φ/r² + φ - φ³ = 0`, `φ(0)=0`, `φ(∞)=1` | `r` |
//! | `stokes_oseen` | `u'' + 2u'/r + ε u u' = 0`, `u(1)=0`, `u(∞)=1` | `x = r - 1` |
//! | `strongly_singular` | `u'' + u'/r + u'² + ε u u' = 0`, `u(1)=0`, `u(∞)=1` | `x = r - 1` |

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constraints::{
    solve_constrained_ranked, Bracket, Candidate, Condition, ConstrainedSolveSpec, SeriesLayout,
    ShootingOptions,
};
use crate::diagnostics::{max_defect, Profile};
use crate::error::{Error, Result};
use crate::factor::{Derivatives, FactorForm};
use crate::series::{series_from_ode, Jet, PolynomialOde, SeriesOracle, TruncatedSeries};

/// Number of points of the standard diagnostic grid.
pub const DEFAULT_GRID_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    LinearSingular,
    CarrierTransfer,
    Logistic,
    Kink,
    Bell,
    BoundaryLayer,
    GpVortex,
    StokesOseen,
    StronglySingular,
}

impl Benchmark {
    pub const ALL: [Benchmark; 9] = [
        Benchmark::LinearSingular,
        Benchmark::CarrierTransfer,
        Benchmark::Logistic,
        Benchmark::Kink,
        Benchmark::Bell,
        Benchmark::BoundaryLayer,
        Benchmark::GpVortex,
        Benchmark::StokesOseen,
        Benchmark::StronglySingular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::LinearSingular => "linear_singular",
            Benchmark::CarrierTransfer => "carrier_transfer",
            Benchmark::Logistic => "logistic",
            Benchmark::Kink => "kink",
            Benchmark::Bell => "bell",
            Benchmark::BoundaryLayer => "boundary_layer",
            Benchmark::GpVortex => "gp_vortex",
            Benchmark::StokesOseen => "stokes_oseen",
            Benchmark::StronglySingular => "strongly_singular",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == name)
            .ok_or_else(|| Error::UnknownProblem(name.to_string()))
    }

    pub fn summary(self) -> &'static str {
        match self {
            Benchmark::LinearSingular => "eps y'' + 2y' + y/eps = 0, y(0)=1, y'(0)=-1/eps; exact exp(-t/eps)",
            Benchmark::CarrierTransfer => "(eps y + t) y' + y - 1 = 0, y(0)=2; exact sqrt(4+2t/eps+t^2/eps^2) - t/eps",
            Benchmark::Logistic => "eps p' = p(1-p), p(0)=p0; exact logistic curve",
            Benchmark::Kink => "(eps/2) phi'' + phi - phi^3 = 0, phi(+-inf)=+-1; exact tanh(x/sqrt(eps))",
            Benchmark::Bell => "(eps/2) phi'' - phi + phi^3 = 0, phi(+-inf)=0; exact sqrt(2) sech(sqrt(2/eps) x)",
            Benchmark::BoundaryLayer => "eps y'' + x y' - x y = 0, y(0)=0, y(1)=e",
            Benchmark::GpVortex => "phi'' + phi'/r - phi/r^2 + phi - phi^3 = 0, phi(0)=0, phi(inf)=1",
            Benchmark::StokesOseen => "u'' + 2u'/r + eps u u' = 0, u(1)=0, u(inf)=1",
            Benchmark::StronglySingular => "u'' + u'/r + u'^2 + eps u u' = 0, u(1)=0, u(inf)=1",
        }
    }

    /// Native variable name used in output.
    pub fn variable(self) -> &'static str {
        match self {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer | Benchmark::Logistic => "t",
            Benchmark::GpVortex | Benchmark::StokesOseen | Benchmark::StronglySingular => "r",
            _ => "x",
        }
    }
}

/// A benchmark instance: equation, parameter, and diagnostic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub benchmark: Benchmark,
    /// ε (the growth time for `logistic`).
    pub epsilon: f64,
    /// Initial value `p_0` (`logistic` only).
    pub p0: Option<f64>,
    pub grid_points: usize,
}

/// Catalog lookup with default parameters (ε = 1, `p_0` = 2).
pub fn builtin(name: &str) -> Result<ProblemSpec> {
    ProblemSpec::new(Benchmark::from_name(name)?, 1.0)
}

impl ProblemSpec {
    pub fn new(benchmark: Benchmark, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self {
            benchmark,
            epsilon,
            p0: (benchmark == Benchmark::Logistic).then_some(2.0),
            grid_points: DEFAULT_GRID_POINTS,
        })
    }

    pub fn with_p0(mut self, p0: f64) -> Result<Self> {
        if self.benchmark != Benchmark::Logistic {
            return Err(Error::InvalidParameter("p0 applies to the logistic problem only".into()));
        }
        if !(p0.is_finite() && p0 > 0.0) {
            return Err(Error::InvalidParameter(format!("p0 must be positive, got {p0}")));
        }
        self.p0 = Some(p0);
        Ok(self)
    }

    pub fn with_grid_points(mut self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("a grid needs at least two points".into()));
        }
        self.grid_points = n;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        self.benchmark.name()
    }

    fn p0(&self) -> f64 {
        self.p0.unwrap_or(2.0)
    }

    /// Native interval of the diagnostic grid.
    pub fn domain(&self) -> (f64, f64) {
        let e = self.epsilon;
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer | Benchmark::Logistic => (0.0, 10.0 * e),
            Benchmark::Kink | Benchmark::Bell => (-6.0 * e.sqrt(), 6.0 * e.sqrt()),
            Benchmark::BoundaryLayer => (0.0, 1.0),
            Benchmark::GpVortex => (0.0, 20.0),
            Benchmark::StokesOseen | Benchmark::StronglySingular => (1.0, 50.0),
        }
    }

    /// Uniform diagnostic grid over [`ProblemSpec::domain`].
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = self.domain();
        uniform_grid(a, b, self.grid_points)
    }

    /// Placement of the normalized series inside the raw working series.
    pub fn layout(&self) -> SeriesLayout {
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer | Benchmark::Logistic | Benchmark::Kink => {
                SeriesLayout { leading_power: 0, power: 1 }
            }
            Benchmark::Bell | Benchmark::GpVortex => SeriesLayout { leading_power: 1, power: 2 },
            Benchmark::BoundaryLayer | Benchmark::StokesOseen | Benchmark::StronglySingular => {
                SeriesLayout { leading_power: 1, power: 1 }
            }
        }
    }

    /// Smallest approximation order accepted by [`solve_problem`].
    pub fn min_order(&self) -> usize {
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer | Benchmark::GpVortex => 1,
            Benchmark::Kink | Benchmark::BoundaryLayer | Benchmark::StokesOseen | Benchmark::StronglySingular => 2,
            Benchmark::Logistic | Benchmark::Bell => 3,
        }
    }

    /// Order of the normalized series used for approximation order `k`.
    ///
    /// `k` counts terms of the raw working series: for the problems expanded
    /// with a vanishing leading term the normalized order is `k - 1`, the bell
    /// series counts raw powers of `z` while being regrouped in `z²`, and the
    /// vortex counts terms of the `r²` series.
    pub fn normalized_order(&self, k: usize) -> Result<usize> {
        if k < self.min_order() {
            return Err(Error::UnsupportedOrder {
                problem: self.name().into(),
                order: k,
                allowed: format!("k >= {}", self.min_order()),
            });
        }
        Ok(match self.benchmark {
            Benchmark::BoundaryLayer | Benchmark::StokesOseen | Benchmark::StronglySingular => k - 1,
            Benchmark::Bell => (k - 1) / 2,
            _ => k,
        })
    }

    /// Conditions imposed on the approximant in the working variable.
    pub fn imposed_conditions(&self) -> Vec<Condition> {
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer => vec![],
            Benchmark::Logistic => vec![Condition::value_at(1.0, self.p0())],
            Benchmark::Kink => vec![Condition::value_at(1.0, 2.0)],
            Benchmark::Bell => vec![Condition::derivative_at(1.0, 0.0)],
            Benchmark::BoundaryLayer => vec![Condition::value_at(1.0, 1.0)],
            Benchmark::GpVortex | Benchmark::StokesOseen | Benchmark::StronglySingular => {
                vec![Condition::asymptotic(0.0, 1.0)]
            }
        }
    }

    /// Finite-point conditions of the original problem, in the native variable.
    pub fn native_conditions(&self) -> Vec<Condition> {
        let e = self.epsilon;
        match self.benchmark {
            Benchmark::LinearSingular => vec![Condition::value_at(0.0, 1.0), Condition::derivative_at(0.0, -1.0 / e)],
            Benchmark::CarrierTransfer => vec![Condition::value_at(0.0, 2.0)],
            Benchmark::Logistic => vec![Condition::value_at(0.0, self.p0())],
            Benchmark::Kink => vec![Condition::value_at(0.0, 0.0)],
            Benchmark::Bell => vec![Condition::derivative_at(0.0, 0.0)],
            Benchmark::BoundaryLayer => vec![Condition::value_at(0.0, 0.0), Condition::value_at(1.0, 1f64.exp())],
            Benchmark::GpVortex => vec![Condition::value_at(0.0, 0.0)],
            Benchmark::StokesOseen | Benchmark::StronglySingular => vec![Condition::value_at(1.0, 0.0)],
        }
    }

    /// Search interval for the shooting parameter, if there is one.
    pub fn bracket(&self) -> Option<Bracket> {
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer => None,
            Benchmark::Logistic => Some(Bracket::linear(-100.0, 0.999)),
            Benchmark::Kink | Benchmark::Bell | Benchmark::GpVortex => Some(Bracket::log(1e-3, 10.0)),
            Benchmark::BoundaryLayer | Benchmark::StokesOseen | Benchmark::StronglySingular => {
                Some(Bracket::log(1e-3, 100.0))
            }
        }
    }

    /// Native variable to working variable.
    pub fn to_working(&self, s: f64) -> f64 {
        let e = self.epsilon;
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::BoundaryLayer | Benchmark::GpVortex => s,
            Benchmark::CarrierTransfer => s / e,
            Benchmark::Logistic => (-s / e).exp(),
            Benchmark::Kink => (2.0 * s / e.sqrt()).exp(),
            Benchmark::Bell => ((2.0 / e).sqrt() * s).exp(),
            Benchmark::StokesOseen | Benchmark::StronglySingular => s - 1.0,
        }
    }

    /// Working variable to native variable.
    pub fn to_native(&self, x: f64) -> f64 {
        let e = self.epsilon;
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::BoundaryLayer | Benchmark::GpVortex => x,
            Benchmark::CarrierTransfer => x * e,
            Benchmark::Logistic => -e * x.ln(),
            Benchmark::Kink => 0.5 * e.sqrt() * x.ln(),
            Benchmark::Bell => (e / 2.0).sqrt() * x.ln(),
            Benchmark::StokesOseen | Benchmark::StronglySingular => x + 1.0,
        }
    }

    /// Native solution and derivatives at `s` from the working solution `w` at `to_working(s)`.
    pub fn native_from_working(&self, s: f64, w: Derivatives) -> Derivatives {
        let e = self.epsilon;
        let chain = |dx: f64, ddx: f64, shift: f64| Derivatives {
            value: w.value + shift,
            first: w.first * dx,
            second: w.second * dx * dx + w.first * ddx,
        };
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::GpVortex | Benchmark::StokesOseen | Benchmark::StronglySingular => w,
            Benchmark::CarrierTransfer => Derivatives {
                value: w.value - s / e,
                first: (w.first - 1.0) / e,
                second: w.second / (e * e),
            },
            Benchmark::Logistic => {
                let x = self.to_working(s);
                chain(-x / e, x / (e * e), 0.0)
            }
            Benchmark::Kink => {
                let z = self.to_working(s);
                chain(2.0 * z / e.sqrt(), 4.0 * z / e, -2.0)
            }
            Benchmark::Bell => {
                let z = self.to_working(s);
                let k = (2.0 / e).sqrt();
                chain(k * z, k * k * z, 0.0)
            }
            Benchmark::BoundaryLayer => {
                let g = s.exp();
                Derivatives {
                    value: w.value * g,
                    first: (w.first + w.value) * g,
                    second: (w.second + 2.0 * w.first + w.value) * g,
                }
            }
        }
    }

    /// Residual `E[y]` of the native equation.
    pub fn residual(&self, s: f64, d: Derivatives) -> f64 {
        let e = self.epsilon;
        let Derivatives { value: y, first: y1, second: y2 } = d;
        match self.benchmark {
            Benchmark::LinearSingular => e * y2 + 2.0 * y1 + y / e,
            Benchmark::CarrierTransfer => (e * y + s) * y1 + y - 1.0,
            Benchmark::Logistic => e * y1 - y * (1.0 - y),
            Benchmark::Kink => 0.5 * e * y2 + y - y * y * y,
            Benchmark::Bell => 0.5 * e * y2 - y + y * y * y,
            Benchmark::BoundaryLayer => e * y2 + s * y1 - s * y,
            // Odd profiles make every term vanish linearly at the axis.
            Benchmark::GpVortex if s == 0.0 => 0.0,
            Benchmark::GpVortex => y2 + y1 / s - y / (s * s) + y - y * y * y,
            Benchmark::StokesOseen => y2 + 2.0 * y1 / s + e * y * y1,
            Benchmark::StronglySingular => y2 + y1 / s + y1 * y1 + e * y * y1,
        }
    }

    /// Closed-form solution with derivatives, where one is known.
    pub fn exact(&self, s: f64) -> Option<Derivatives> {
        let e = self.epsilon;
        Some(match self.benchmark {
            Benchmark::LinearSingular => {
                let v = (-s / e).exp();
                Derivatives { value: v, first: -v / e, second: v / (e * e) }
            }
            Benchmark::CarrierTransfer => {
                let x = s / e;
                let z = (4.0 + 2.0 * x + x * x).sqrt();
                let z1 = (1.0 + x) / z;
                let z2 = 3.0 / (z * z * z);
                Derivatives { value: z - x, first: (z1 - 1.0) / e, second: z2 / (e * e) }
            }
            Benchmark::Logistic => {
                let p0 = self.p0();
                let q = (1.0 - p0) * (-s / e).exp();
                let d = p0 + q;
                Derivatives {
                    value: p0 / d,
                    first: p0 * q / (e * d * d),
                    second: p0 * q * (2.0 * q - d) / (e * e * d * d * d),
                }
            }
            Benchmark::Kink => {
                let t = (s / e.sqrt()).tanh();
                Derivatives { value: t, first: (1.0 - t * t) / e.sqrt(), second: -2.0 * t * (1.0 - t * t) / e }
            }
            Benchmark::Bell => {
                let k = (2.0 / e).sqrt();
                let sech = 1.0 / (k * s).cosh();
                let t = (k * s).tanh();
                let r2 = std::f64::consts::SQRT_2;
                Derivatives {
                    value: r2 * sech,
                    first: -r2 * k * sech * t,
                    second: r2 * k * k * sech * (1.0 - 2.0 * sech * sech),
                }
            }
            _ => return None,
        })
    }

    /// Approximant of order `k` (see [`solve_problem`]).
    pub fn solve(&self, k: usize) -> Result<Solution> {
        solve_problem(self, k)
    }
}

impl PolynomialOde for ProblemSpec {
    fn parameter_names(&self) -> Vec<String> {
        match self.benchmark {
            Benchmark::LinearSingular | Benchmark::CarrierTransfer => vec![],
            _ => vec!["a1".into()],
        }
    }

    fn index_lag(&self) -> usize {
        match self.benchmark {
            Benchmark::LinearSingular
            | Benchmark::BoundaryLayer
            | Benchmark::StokesOseen
            | Benchmark::StronglySingular => 2,
            Benchmark::CarrierTransfer => 1,
            _ => 0,
        }
    }

    fn leading(&self, theta: &[f64]) -> Vec<Complex64> {
        let c = |v: f64| Complex64::new(v, 0.0);
        let t = theta.first().copied().unwrap_or(f64::NAN);
        match self.benchmark {
            Benchmark::LinearSingular => vec![c(1.0), c(-1.0 / self.epsilon)],
            Benchmark::CarrierTransfer => vec![c(2.0)],
            Benchmark::Logistic | Benchmark::Kink => vec![c(1.0), c(t)],
            _ => vec![c(0.0), c(t)],
        }
    }

    fn residual(&self, y: &Jet) -> Jet {
        let e = self.epsilon;
        let y1 = y.d();
        let y2 = y1.d();
        match self.benchmark {
            Benchmark::LinearSingular => e * y2 + 2.0 * y1 + (1.0 / e) * y.clone(),
            // z z' - x - 1
            Benchmark::CarrierTransfer => y * &y1 - y.affine(1.0, 1.0),
            // x y' - y² + y
            Benchmark::Logistic => y1.x(1) - y * y + y.clone(),
            // 2 z² y'' + 2 z y' + 6 - 11 y + 6 y² - y³
            Benchmark::Kink => {
                let sq = y * y;
                let cube = &sq * y;
                2.0 * y2.x(2) + 2.0 * y1.x(1) + y.affine(6.0, 0.0) - 11.0 * y.clone() + 6.0 * sq - cube
            }
            // z² y'' + z y' - y + y³
            Benchmark::Bell => {
                let cube = &(y * y) * y;
                y2.x(2) + y1.x(1) - y.clone() + cube
            }
            // ε z'' + (2ε + x) z' + ε z
            Benchmark::BoundaryLayer => e * y2 + 2.0 * e * y1.clone() + y1.x(1) + e * y.clone(),
            // r² φ'' + r φ' - φ + r² φ - r² φ³
            Benchmark::GpVortex => {
                let cube = &(y * y) * y;
                y2.x(2) + y1.x(1) - y.clone() + y.x(2) - cube.x(2)
            }
            // (1 + x) y'' + 2 y' + ε (1 + x) y y'
            Benchmark::StokesOseen => {
                let yy1 = y * &y1;
                y2.clone() + y2.x(1) + 2.0 * y1 + e * (yy1.clone() + yy1.x(1))
            }
            // (1 + x) y'' + y' + (1 + x) y'² + ε (1 + x) y y'
            Benchmark::StronglySingular => {
                let yy1 = y * &y1;
                let sq = &y1 * &y1;
                y2.clone() + y2.x(1) + y1 + sq.clone() + sq.x(1) + e * (yy1.clone() + yy1.x(1))
            }
        }
    }
}

impl SeriesOracle for ProblemSpec {
    fn parameter_names(&self) -> Vec<String> {
        PolynomialOde::parameter_names(self)
    }

    fn series(&self, order: usize, theta: &[f64]) -> Result<TruncatedSeries> {
        if theta.len() != PolynomialOde::parameter_names(self).len() {
            return Err(Error::InvalidParameter(format!(
                "{} expects {} parameter(s), got {}",
                self.name(),
                PolynomialOde::parameter_names(self).len(),
                theta.len()
            )));
        }
        series_from_ode(self, order, theta).map(|s| s.with_variable(self.working_variable()))
    }
}

impl ProblemSpec {
    fn working_variable(&self) -> &'static str {
        match self.benchmark {
            Benchmark::CarrierTransfer | Benchmark::Kink | Benchmark::Bell | Benchmark::BoundaryLayer => "z",
            Benchmark::GpVortex => "r",
            _ => "x",
        }
    }
}

/// Evenly spaced points including both ends.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a + h * i as f64 }).collect()
}

/// An approximant mapped back to the native variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub problem: ProblemSpec,
    /// Approximation order.
    pub k: usize,
    /// Approximant in the working variable.
    pub form: FactorForm,
    /// Shooting parameter(s) at the selected root.
    pub theta: Vec<f64>,
    /// Residuals of the imposed conditions.
    pub residuals: Vec<f64>,
    /// Maximal defect on the diagnostic grid, used to rank roots.
    pub defect: Option<f64>,
    /// Other roots of the shooting problem, best first.
    pub alternates: Vec<Candidate>,
}

impl Solution {
    pub fn evaluate(&self, s: f64) -> Result<f64> {
        Ok(self.evaluate_with_derivatives(s)?.value)
    }

    pub fn evaluate_with_derivatives(&self, s: f64) -> Result<Derivatives> {
        native_eval(&self.problem, &self.form, s)
    }
}

fn native_eval(p: &ProblemSpec, form: &FactorForm, s: f64) -> Result<Derivatives> {
    let w = form.evaluate_with_derivatives(p.to_working(s))?;
    Ok(p.native_from_working(s, w))
}

impl Profile for Solution {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        self.evaluate_with_derivatives(s)
    }
}

/// The closed-form solution of a problem as a [`Profile`].
pub struct Exact<'a>(pub &'a ProblemSpec);

impl Profile for Exact<'_> {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        self.0
            .exact(s)
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no closed-form solution", self.0.name())))
    }
}

/// Builds the order-`k` approximant with default shooting options.
pub fn solve_problem(spec: &ProblemSpec, k: usize) -> Result<Solution> {
    solve_problem_with(spec, k, &ShootingOptions::default())
}

/// Series generation, moments, constrained fit, and root ranking by the
/// maximal defect on the diagnostic grid.
pub fn solve_problem_with(spec: &ProblemSpec, k: usize, opts: &ShootingOptions) -> Result<Solution> {
    let order = spec.normalized_order(k)?;
    let cs = ConstrainedSolveSpec {
        oracle: spec,
        layout: spec.layout(),
        order,
        conditions: spec.imposed_conditions(),
        bracket: spec.bracket(),
        options: *opts,
    };
    let grid = spec.grid();
    let score = |f: &FactorForm| -> Option<f64> {
        let profile = FormProfile { problem: spec, form: f };
        max_defect(spec, &profile, &grid)
    };
    let sol = solve_constrained_ranked(&cs, Some(&score))?;
    Ok(Solution {
        problem: *spec,
        k,
        form: sol.best.form,
        theta: sol.best.theta,
        residuals: sol.best.residuals,
        defect: sol.best.score,
        alternates: sol.alternates,
    })
}

struct FormProfile<'a> {
    problem: &'a ProblemSpec,
    form: &'a FactorForm,
}

impl Profile for FormProfile<'_> {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        native_eval(self.problem, self.form, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(s: &TruncatedSeries) -> Vec<f64> {
        s.coeffs().iter().map(|c| c.re).collect()
    }

    #[test]
    fn catalog_round_trips_names() {
        for b in Benchmark::ALL {
            assert_eq!(Benchmark::from_name(b.name()).unwrap(), b);
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownProblem(_))));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ProblemSpec::new(Benchmark::Kink, 0.0).is_err());
        assert!(ProblemSpec::new(Benchmark::Logistic, 1.0).unwrap().with_p0(-1.0).is_err());
        assert!(ProblemSpec::new(Benchmark::Kink, 1.0).unwrap().with_p0(2.0).is_err());
    }

    #[test]
    fn carrier_transfer_series() {
        let p = ProblemSpec::new(Benchmark::CarrierTransfer, 0.7).unwrap();
        let s = SeriesOracle::series(&p, 2, &[]).unwrap();
        let got = re(&s);
        for (g, w) in got.iter().zip([2.0, 0.5, 3.0 / 16.0]) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn kink_series_closed_form() {
        let p = ProblemSpec::new(Benchmark::Kink, 1.0).unwrap();
        let a1 = 0.8;
        let s = SeriesOracle::series(&p, 12, &[a1]).unwrap();
        for n in 1..=12 {
            let want = (-1f64).powi(n as i32 - 1) * a1.powi(n as i32) / 2f64.powi(n as i32 - 1);
            assert!((s.coeff(n).re - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn bell_series_closed_form() {
        let p = ProblemSpec::new(Benchmark::Bell, 1.0).unwrap();
        let a1 = 1.3;
        let s = SeriesOracle::series(&p, 13, &[a1]).unwrap();
        for n in 0..=6 {
            assert_eq!(s.coeff(2 * n).re, 0.0);
            let want = (-0.125f64).powi(n as i32) * a1.powi(2 * n as i32 + 1);
            assert!((s.coeff(2 * n + 1).re - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn logistic_series_is_geometric() {
        let p = ProblemSpec::new(Benchmark::Logistic, 1.0).unwrap();
        let s = SeriesOracle::series(&p, 12, &[-0.6]).unwrap();
        for n in 0..=12 {
            let want = (-0.6f64).powi(n as i32);
            assert!((s.coeff(n).re - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn linear_singular_series_is_exponential() {
        let e = 0.3;
        let p = ProblemSpec::new(Benchmark::LinearSingular, e).unwrap();
        let s = SeriesOracle::series(&p, 12, &[]).unwrap();
        let mut want = 1.0;
        for n in 0..=12 {
            if n > 0 {
                want *= -1.0 / (e * n as f64);
            }
            assert!((s.coeff(n).re - want).abs() <= 1e-12 * want.abs());
        }
    }

    #[test]
    fn gp_series_leading_coefficients() {
        let p = ProblemSpec::new(Benchmark::GpVortex, 1.0).unwrap();
        let a1 = 0.58;
        let s = SeriesOracle::series(&p, 9, &[a1]).unwrap();
        let want = [
            (3, -a1 / 8.0),
            (5, (1.0 + 8.0 * a1 * a1) * a1 / 192.0),
            (7, -(1.0 + 80.0 * a1 * a1) * a1 / 9216.0),
        ];
        for (n, w) in want {
            assert!((s.coeff(n).re - w).abs() <= 1e-12 * w.abs(), "a_{n}");
        }
    }

    #[test]
    fn wrong_parameter_count_is_rejected() {
        let p = ProblemSpec::new(Benchmark::GpVortex, 1.0).unwrap();
        assert!(SeriesOracle::series(&p, 3, &[]).is_err());
    }

    #[test]
    fn order_conventions() {
        let bl = ProblemSpec::new(Benchmark::BoundaryLayer, 1.0).unwrap();
        assert_eq!(bl.normalized_order(7).unwrap(), 6);
        let bell = ProblemSpec::new(Benchmark::Bell, 1.0).unwrap();
        assert_eq!(bell.normalized_order(3).unwrap(), 1);
        assert_eq!(bell.normalized_order(6).unwrap(), 2);
        let log = ProblemSpec::new(Benchmark::Logistic, 1.0).unwrap();
        assert!(matches!(log.normalized_order(2), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn transforms_invert() {
        for b in Benchmark::ALL {
            let p = ProblemSpec::new(b, 0.5).unwrap().with_grid_points(101).unwrap();
            for s in p.grid() {
                let back = p.to_native(p.to_working(s));
                assert!((back - s).abs() <= 1e-12 * (1.0 + s.abs()), "{} at {s}", b.name());
            }
        }
    }

    #[test]
    fn exact_solutions_have_no_defect() {
        for b in &Benchmark::ALL[..5] {
            for eps in [0.1, 1.0, 10.0] {
                let p = ProblemSpec::new(*b, eps).unwrap();
                for s in p.grid() {
                    let d = p.exact(s).unwrap();
                    assert!(p.residual(s, d).abs() < 1e-10, "{} eps={eps} s={s}", b.name());
                }
            }
        }
    }

    #[test]
    fn exact_solutions_meet_native_conditions() {
        assert_eq!(ProblemSpec::new(Benchmark::CarrierTransfer, 3.0).unwrap().exact(0.0).unwrap().value, 2.0);
        let ls = ProblemSpec::new(Benchmark::LinearSingular, 1.0).unwrap().exact(0.0).unwrap();
        assert_eq!((ls.value, ls.first), (1.0, -1.0));
        let lg = ProblemSpec::new(Benchmark::Logistic, 1.0).unwrap().exact(60.0).unwrap();
        assert!((lg.value - 1.0).abs() < 1e-15);
    }
}
