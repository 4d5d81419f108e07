//! Conditions on factor approximants and shooting over free series parameters.
//!
//! A large-variable condition `f ~ B x^β` splits in two. The exponent part
//! fixes `Σ n_i` and enters the moment system as a zeroth moment
//! `B_0 = (β - α) / s`, which also decides whether `A_1 = 1` is pinned
//! (odd moment count). The amplitude part `c Π A_i^{n_i} = B`, like a value
//! or slope prescribed at a point, is a scalar residual in the shooting
//! parameter θ. Roots in θ are bracketed on a dense scan and refined with
//! Brent's method.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{fit_moments, FactorForm, FitOptions};
use crate::moments::moments_from_series;
use crate::series::SeriesOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    ValueAtPoint,
    DerivativeAtPoint,
    AsymptoticPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Point(f64),
    Infinity,
}

/// A scalar condition in the working variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub kind: ConditionKind,
    pub location: Location,
    /// Prescribed value, slope, or large-variable amplitude `B`.
    pub target: f64,
    /// Large-variable exponent `β` (asymptotic conditions only).
    pub exponent: f64,
}

impl Condition {
    pub fn value_at(x: f64, value: f64) -> Self {
        Self {
            kind: ConditionKind::ValueAtPoint,
            location: Location::Point(x),
            target: value,
            exponent: 0.0,
        }
    }

    pub fn derivative_at(x: f64, slope: f64) -> Self {
        Self {
            kind: ConditionKind::DerivativeAtPoint,
            location: Location::Point(x),
            target: slope,
            exponent: 0.0,
        }
    }

    /// `f(x) ≃ amplitude · x^beta` as `x -> ∞`.
    pub fn asymptotic(beta: f64, amplitude: f64) -> Self {
        Self {
            kind: ConditionKind::AsymptoticPower,
            location: Location::Infinity,
            target: amplitude,
            exponent: beta,
        }
    }

    /// Residual of a point condition, complex so that non-real forms are visible.
    pub fn point_residual(&self, f: &FactorForm) -> Result<Complex64> {
        let Location::Point(x) = self.location else {
            return Err(Error::InvalidParameter("point residual of a condition at infinity".into()));
        };
        let v = f.eval_complex(x)?;
        let got = match self.kind {
            ConditionKind::ValueAtPoint => v[0],
            ConditionKind::DerivativeAtPoint => v[1],
            ConditionKind::AsymptoticPower => {
                return Err(Error::InvalidParameter("asymptotic condition has no point".into()))
            }
        };
        Ok(got - self.target)
    }
}

/// Amplitude and exponent residuals `(c Π A_i^{n_i} - B, α + s Σ n_i - β)`.
pub fn apply_asymptotic(f: &FactorForm, cond: &Condition) -> Result<(f64, f64)> {
    if cond.kind != ConditionKind::AsymptoticPower || cond.location != Location::Infinity {
        return Err(Error::InvalidParameter("not an asymptotic condition".into()));
    }
    let amp = f.amplitude_at_infinity()? - cond.target;
    let exp = f.exponent_at_infinity()? - cond.exponent;
    let tol = 1e-9;
    if amp.im.abs() > tol * (1.0 + amp.re.abs()) {
        return Err(Error::ConjugationBroken {
            x: f64::INFINITY,
            residue: amp.im.abs(),
        });
    }
    if exp.im.abs() > tol * (1.0 + exp.re.abs()) {
        return Err(Error::ConjugationBroken {
            x: f64::INFINITY,
            residue: exp.im.abs(),
        });
    }
    Ok((amp.re, exp.re))
}

/// Where the normalized series sits inside the raw one: `a = c x^σ (1 + b_1 x^s + ...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesLayout {
    /// σ.
    pub leading_power: usize,
    /// s.
    pub power: u32,
}

impl SeriesLayout {
    /// Raw order needed for a normalized series of order `k`.
    pub fn raw_order(&self, k: usize) -> usize {
        self.leading_power + self.power as usize * k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Search interval for the shooting parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub spacing: Spacing,
}

impl Bracket {
    pub fn log(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            spacing: Spacing::Log,
        }
    }

    pub fn linear(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            spacing: Spacing::Linear,
        }
    }

    /// Scan points, optionally jittered inside their cells by a seeded generator.
    pub fn grid(&self, points: usize, seed: u64) -> Vec<f64> {
        let n = points.max(2);
        let (a, b) = match self.spacing {
            Spacing::Linear => (self.lo, self.hi),
            Spacing::Log => (self.lo.ln(), self.hi.ln()),
        };
        let h = (b - a) / (n - 1) as f64;
        let mut rng = (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed));
        (0..n)
            .map(|i| {
                let mut u = a + h * i as f64;
                if let Some(rng) = rng.as_mut() {
                    if i > 0 && i + 1 < n {
                        u += h * rng.gen_range(-0.25..0.25);
                    }
                }
                match self.spacing {
                    Spacing::Linear => u,
                    Spacing::Log => u.exp(),
                }
            })
            .collect()
    }
}

/// Root-search and fitting parameters for constrained solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub scan_points: usize,
    /// Bisection depth for cells whose endpoints disagree on realness.
    pub refine_depth: usize,
    /// Largest accepted condition residual at a root.
    pub root_tol: f64,
    /// Nonzero seeds jitter the scan grid.
    pub seed: u64,
    pub fit: FitOptions,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            scan_points: 2000,
            refine_depth: 24,
            root_tol: 1e-9,
            seed: 0,
            fit: FitOptions::default(),
        }
    }
}

/// Everything needed to build approximants satisfying imposed conditions.
pub struct ConstrainedSolveSpec<'a> {
    pub oracle: &'a dyn SeriesOracle,
    pub layout: SeriesLayout,
    /// Normalized order `k`.
    pub order: usize,
    /// Imposed conditions, in the working variable.
    pub conditions: Vec<Condition>,
    pub bracket: Option<Bracket>,
    pub options: ShootingOptions,
}

/// One root of the shooting problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub form: FactorForm,
    pub theta: Vec<f64>,
    /// Condition residuals, one per imposed condition (exponent residuals included).
    pub residuals: Vec<f64>,
    /// Ranking score (smaller is better), when a scorer was supplied.
    pub score: Option<f64>,
}

/// Best candidate plus the other admissible roots, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedSolution {
    pub best: Candidate,
    pub alternates: Vec<Candidate>,
}

impl ConstrainedSolveSpec<'_> {
    fn asymptotic(&self) -> Result<Option<Condition>> {
        let mut it = self
            .conditions
            .iter()
            .filter(|c| c.kind == ConditionKind::AsymptoticPower);
        let first = it.next().copied();
        if it.next().is_some() {
            return Err(Error::InvalidParameter("at most one asymptotic condition".into()));
        }
        Ok(first)
    }

    /// The approximant built from the oracle's series at `theta`.
    pub fn form_at(&self, theta: &[f64]) -> Result<FactorForm> {
        let raw = self.oracle.series(self.layout.raw_order(self.order), theta)?;
        let (prefactor, norm) = raw.normalize(self.layout.leading_power, self.layout.power)?;
        let mut b = moments_from_series(&norm)?;
        if let Some(cond) = self.asymptotic()? {
            let alpha = prefactor.infinity_exponent.ok_or_else(|| {
                Error::InvalidParameter("prefactor has no large-variable exponent".into())
            })?;
            let b0 = (cond.exponent - alpha as f64) / self.layout.power as f64;
            b = b.with_zeroth(Complex64::new(b0, 0.0));
        }
        let fit = fit_moments(&b, &self.options.fit)?;
        Ok(FactorForm {
            prefactor,
            power: self.layout.power,
            factors: fit.factors,
            order: self.order,
            real: fit.real,
            residual: fit.residual,
        })
    }

    /// Scalar residuals that the shooting parameters must zero.
    pub fn shooting_residuals(&self, f: &FactorForm) -> Result<Vec<Complex64>> {
        self.conditions
            .iter()
            .map(|c| match c.kind {
                ConditionKind::AsymptoticPower => Ok(f.amplitude_at_infinity()? - c.target),
                _ => c.point_residual(f),
            })
            .collect()
    }

    /// All condition residuals of a form, real parts.
    pub fn condition_residuals(&self, f: &FactorForm) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for c in &self.conditions {
            match c.kind {
                ConditionKind::AsymptoticPower => {
                    let (a, e) = apply_asymptotic(f, c)?;
                    out.push(a);
                    out.push(e);
                }
                _ => out.push(c.point_residual(f)?.re),
            }
        }
        Ok(out)
    }

    fn candidate(&self, theta: Vec<f64>) -> Result<Candidate> {
        let form = self.form_at(&theta)?;
        let residuals = self.condition_residuals(&form)?;
        Ok(Candidate {
            form,
            theta,
            residuals,
            score: None,
        })
    }
}

/// Solves without ranking: candidates are ordered by increasing θ.
pub fn solve_constrained(spec: &ConstrainedSolveSpec<'_>) -> Result<ConstrainedSolution> {
    solve_constrained_ranked(spec, None)
}

/// Solves and ranks roots by `score` (smaller first). Candidates whose score is
/// `None` are discarded as inadmissible. Ties fall back to `Σ|Im n_i|`, then `Σ|n_i|`.
pub fn solve_constrained_ranked(
    spec: &ConstrainedSolveSpec<'_>,
    score: Option<&(dyn Fn(&FactorForm) -> Option<f64> + Sync)>,
) -> Result<ConstrainedSolution> {
    let params = spec.oracle.parameter_names().len();
    spec.asymptotic()?;
    let conditions = spec.conditions.len();
    if params != conditions {
        return Err(Error::ParameterImbalance {
            conditions,
            parameters: params,
        });
    }
    let mut candidates = match params {
        0 => vec![spec.candidate(Vec::new())?],
        1 => {
            let bracket = spec.bracket.ok_or_else(|| {
                Error::InvalidParameter("a search bracket is required for the shooting parameter".into())
            })?;
            let h = |t: f64| -> Option<Complex64> {
                let f = spec.form_at(&[t]).ok()?;
                spec.shooting_residuals(&f).ok().map(|r| r[0])
            };
            let roots = find_roots(&h, &bracket, &spec.options);
            if roots.is_empty() {
                return Err(Error::NoRootInBracket {
                    lo: bracket.lo,
                    hi: bracket.hi,
                });
            }
            roots
                .into_iter()
                .filter_map(|t| spec.candidate(vec![t]).ok())
                .collect::<Vec<_>>()
        }
        _ => {
            return Err(Error::InvalidParameter(
                "only a single shooting parameter is supported".into(),
            ))
        }
    };
    let found = candidates.len();
    if let Some(score) = score {
        candidates = candidates
            .into_par_iter()
            .filter_map(|mut c| {
                c.score = Some(score(&c.form)?);
                Some(c)
            })
            .collect();
        candidates.sort_by(|a, b| {
            let key = |c: &Candidate| {
                let im: f64 = c.form.factors.iter().map(|f| f.exponent.im.abs()).sum();
                let abs: f64 = c.form.factors.iter().map(|f| f.exponent.norm()).sum();
                (c.score.unwrap_or(f64::INFINITY), im, abs)
            };
            let (sa, ia, aa) = key(a);
            let (sb, ib, ab) = key(b);
            sa.total_cmp(&sb).then(ia.total_cmp(&ib)).then(aa.total_cmp(&ab))
        });
    }
    let mut it = candidates.into_iter();
    let best = it.next().ok_or(Error::NoAdmissibleRoot { roots: found })?;
    Ok(ConstrainedSolution {
        best,
        alternates: it.collect(),
    })
}

fn is_real(v: Option<Complex64>) -> bool {
    matches!(v, Some(z) if z.re.is_finite() && z.im.abs() < 1e-9 * (1.0 + z.re.abs()))
}

/// Roots of `Re h` where `h` is real, over a scan of `bracket`.
///
/// Cells with real values of opposite sign go to Brent's method. Cells where
/// exactly one end is real (the other complex or failed) are bisected, since
/// a real branch may end inside them.
pub fn find_roots<F>(h: &F, bracket: &Bracket, opts: &ShootingOptions) -> Vec<f64>
where
    F: Fn(f64) -> Option<Complex64> + Sync,
{
    let grid = bracket.grid(opts.scan_points, opts.seed);
    let values: Vec<Option<Complex64>> = grid.par_iter().map(|&t| h(t)).collect();
    let mut roots: Vec<f64> = (0..grid.len() - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            refine(
                h,
                (grid[i], values[i]),
                (grid[i + 1], values[i + 1]),
                opts.refine_depth,
                opts.root_tol,
                &mut out,
            );
            out
        })
        .collect();
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    roots
}

fn refine<F>(
    h: &F,
    (a, fa): (f64, Option<Complex64>),
    (b, fb): (f64, Option<Complex64>),
    depth: usize,
    tol: f64,
    out: &mut Vec<f64>,
) where
    F: Fn(f64) -> Option<Complex64> + Sync,
{
    let (ra, rb) = (is_real(fa), is_real(fb));
    if ra && rb {
        let (ya, yb) = (fa.unwrap().re, fb.unwrap().re);
        if ya == 0.0 {
            out.push(a);
            return;
        }
        if ya * yb < 0.0 {
            let g = |t: f64| h(t).filter(|z| is_real(Some(*z))).map(|z| z.re);
            if let Some(t) = brent_root(&g, a, b, ya, yb) {
                if h(t).is_some_and(|z| z.norm() < tol) {
                    out.push(t);
                }
            }
        }
        return;
    }
    if (ra || rb) && depth > 0 {
        let m = 0.5 * (a + b);
        let fm = h(m);
        refine(h, (a, fa), (m, fm), depth - 1, tol, out);
        refine(h, (m, fm), (b, fb), depth - 1, tol, out);
    }
}

/// Brent's method on a bracketing interval; `None` if `g` fails inside.
pub(crate) fn brent_root<G: Fn(f64) -> Option<f64>>(g: &G, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Option<f64> {
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 1e-300;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(xm) };
        fb = g(b)?;
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::Factor;
    use crate::series::{Prefactor, TruncatedSeries};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pure_power_meets_its_asymptotics() {
        let f = FactorForm {
            prefactor: Prefactor::unit(),
            power: 1,
            factors: vec![Factor::power(c(1.0), c(-1.0))],
            order: 1,
            real: true,
            residual: 0.0,
        };
        assert_eq!(apply_asymptotic(&f, &Condition::asymptotic(-1.0, 1.0)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn exponent_residual_uses_power_of_variable() {
        let f = FactorForm {
            prefactor: Prefactor::power(c(2.0), 1),
            power: 2,
            factors: vec![Factor::power(c(4.0), c(-0.5))],
            order: 1,
            real: true,
            residual: 0.0,
        };
        let (amp, exp) = apply_asymptotic(&f, &Condition::asymptotic(0.0, 1.0)).unwrap();
        assert!(amp.abs() < 1e-15);
        assert!(exp.abs() < 1e-15);
    }

    #[test]
    fn exponential_factor_has_no_power_law() {
        let f = FactorForm {
            prefactor: Prefactor::unit(),
            power: 1,
            factors: vec![Factor::exponential(c(-1.0))],
            order: 1,
            real: true,
            residual: 0.0,
        };
        assert_eq!(
            apply_asymptotic(&f, &Condition::asymptotic(0.0, 1.0)),
            Err(Error::ExponentialAtInfinity)
        );
    }

    /// Series of `1/(1 - θ x)`, the logistic family.
    struct Geometric;

    impl SeriesOracle for Geometric {
        fn parameter_names(&self) -> Vec<String> {
            vec!["theta".into()]
        }
        fn series(&self, order: usize, theta: &[f64]) -> Result<TruncatedSeries> {
            Ok(TruncatedSeries::from_real(
                &(0..=order).map(|n| theta[0].powi(n as i32)).collect::<Vec<_>>(),
            ))
        }
    }

    #[test]
    fn shooting_finds_value_condition() {
        let spec = ConstrainedSolveSpec {
            oracle: &Geometric,
            layout: SeriesLayout {
                leading_power: 0,
                power: 1,
            },
            order: 3,
            conditions: vec![Condition::value_at(1.0, 2.0)],
            bracket: Some(Bracket::linear(-5.0, 0.99)),
            options: ShootingOptions::default(),
        };
        let sol = solve_constrained(&spec).unwrap();
        assert!((sol.best.theta[0] - 0.5).abs() < 1e-12);
        assert!(sol.best.residuals[0].abs() < 1e-12);
        assert!(sol.alternates.is_empty());
    }

    #[test]
    fn imbalance_is_rejected() {
        let spec = ConstrainedSolveSpec {
            oracle: &Geometric,
            layout: SeriesLayout {
                leading_power: 0,
                power: 1,
            },
            order: 3,
            conditions: vec![],
            bracket: None,
            options: ShootingOptions::default(),
        };
        assert_eq!(
            solve_constrained(&spec).unwrap_err(),
            Error::ParameterImbalance {
                conditions: 0,
                parameters: 1
            }
        );
    }

    #[test]
    fn seeded_grid_is_reproducible_and_jittered() {
        let b = Bracket::log(1e-3, 10.0);
        assert_eq!(b.grid(50, 7), b.grid(50, 7));
        assert_ne!(b.grid(50, 7), b.grid(50, 0));
        let g = b.grid(50, 0);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[49] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn brent_converges_on_cubic() {
        let r = brent_root(&|x: f64| Some(x * x * x - 2.0), 0.0, 2.0, -2.0, 6.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }
}
