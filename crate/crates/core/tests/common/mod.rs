//! Property checks shared by the proptest suite and the acceptance runner.
#![allow(dead_code)]

use factor_approx::diagnostics::{error, max_defect, DefectReport, Profile};
use factor_approx::factor::{solve_moments, Derivatives, Factor, FactorForm, FitOptions};
use factor_approx::moments::moments_from_series;
use factor_approx::problems::{Benchmark, Exact, ProblemSpec};
use factor_approx::series::{Prefactor, TruncatedSeries};
use factor_approx::{Complex64, Result};

pub type Check = std::result::Result<(), String>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn form(scale: f64, sigma: i32, nodes: &[f64], exponents: &[f64]) -> FactorForm {
    FactorForm {
        prefactor: Prefactor::power(c(scale), sigma),
        power: 1,
        factors: nodes.iter().zip(exponents).map(|(&a, &n)| Factor::power(c(a), c(n))).collect(),
        order: 2 * nodes.len(),
        real: true,
        residual: 0.0,
    }
}

/// Nodes at least `gap` apart and at least `gap` from zero.
pub fn well_separated(nodes: &[f64], gap: f64) -> bool {
    nodes.iter().all(|a| a.abs() >= gap)
        && nodes.iter().enumerate().all(|(i, a)| nodes[..i].iter().all(|b| (a - b).abs() >= gap))
}

/// Expanding a known product to order `2p` and fitting recovers it.
pub fn round_trip(nodes: &[f64], exponents: &[f64], tol: f64) -> Check {
    let f = form(1.0, 0, nodes, exponents);
    let s = f.expand(2 * nodes.len());
    let b = moments_from_series(&s).map_err(|e| e.to_string())?;
    let g = solve_moments(&b, &FitOptions::default()).map_err(|e| e.to_string())?;
    if g.factors.len() != nodes.len() {
        return Err(format!("{} factors recovered, {} expected", g.factors.len(), nodes.len()));
    }
    for (&a, &n) in nodes.iter().zip(exponents) {
        let hit = g
            .factors
            .iter()
            .min_by(|x, y| (x.node - a).norm().total_cmp(&(y.node - a).norm()))
            .unwrap();
        let (da, dn) = ((hit.node - a).norm(), (hit.exponent - n).norm());
        if da > tol || dn > tol {
            return Err(format!("A = {a}, n = {n}: recovered {}, {} (errors {da:e}, {dn:e})", hit.node, hit.exponent));
        }
    }
    Ok(())
}

/// Fits a normalized real series; `None` when no factor form exists.
pub fn fit(coeffs: &[f64]) -> Option<FactorForm> {
    let mut a = vec![1.0];
    a.extend_from_slice(coeffs);
    let s = TruncatedSeries::from_real(&a);
    let b = moments_from_series(&s).ok()?;
    solve_moments(&b, &FitOptions::default()).ok()
}

/// Re-expanding a fitted form reproduces the source coefficients.
pub fn re_expansion(coeffs: &[f64], tol: f64) -> Check {
    let Some(f) = fit(coeffs) else { return Ok(()) };
    let e = f.expand(coeffs.len());
    let scale = coeffs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (n, &want) in coeffs.iter().enumerate() {
        let got = e.coeff(n + 1);
        if (got - want).norm() > tol * scale {
            return Err(format!("a_{} = {want} re-expanded as {got}", n + 1));
        }
    }
    Ok(())
}

/// A real source gives a form closed under conjugation.
pub fn conjugate_closure(coeffs: &[f64]) -> Check {
    let Some(f) = fit(coeffs) else { return Ok(()) };
    if !f.real {
        return Err("form from a real series is not flagged real".into());
    }
    for g in &f.factors {
        let partner = f.factors.iter().any(|h| {
            (h.node - g.node.conj()).norm() <= 1e-8 * (1.0 + g.node.norm())
                && (h.exponent - g.exponent.conj()).norm() <= 1e-8 * (1.0 + g.exponent.norm())
                && (h.rate - g.rate.conj()).norm() <= 1e-8 * (1.0 + g.rate.norm())
        });
        if !partner {
            return Err(format!("factor {:?} has no conjugate partner", g));
        }
    }
    Ok(())
}

/// Analytic derivatives against central differences, relative tolerance.
pub fn derivatives(f: &FactorForm, x: f64, tol: f64) -> Check {
    let h = 1e-4 * (1.0 + x.abs());
    let at = |x: f64| f.evaluate_with_derivatives(x).map_err(|e| e.to_string());
    let d = at(x)?;
    let (lo, hi) = (at(x - h)?, at(x + h)?);
    let fd1 = (hi.value - lo.value) / (2.0 * h);
    let fd2 = (hi.first - lo.first) / (2.0 * h);
    let scale = d.value.abs() + d.first.abs() + d.second.abs();
    if (fd1 - d.first).abs() > tol * scale.max(1e-12) {
        return Err(format!("x = {x}: f' = {} vs finite difference {fd1}", d.first));
    }
    if (fd2 - d.second).abs() > tol * scale.max(1e-12) {
        return Err(format!("x = {x}: f'' = {} vs finite difference {fd2}", d.second));
    }
    Ok(())
}

/// Moments of an expanded product are its power sums; `exp(log s) = s`.
pub fn moment_log(nodes: &[f64], exponents: &[f64], order: usize) -> Check {
    let f = form(1.0, 0, nodes, exponents);
    let s = f.expand(order);
    let b = moments_from_series(&s).map_err(|e| e.to_string())?;
    for m in 1..=order {
        let want: f64 = nodes.iter().zip(exponents).map(|(a, n)| n * a.powi(m as i32)).sum();
        let got = b.get(m).unwrap();
        if (got - want).norm() > 1e-10 * (1.0 + want.abs()) {
            return Err(format!("B_{m} = {got}, power sum {want}"));
        }
    }
    let back = s.log().map_err(|e| e.to_string())?.exp();
    for n in 0..=order {
        if (back.coeff(n) - s.coeff(n)).norm() > 1e-10 * (1.0 + s.coeff(n).norm()) {
            return Err(format!("exp(log s) differs at a_{n}"));
        }
    }
    Ok(())
}

pub const EXACT: [Benchmark; 5] = [
    Benchmark::LinearSingular,
    Benchmark::CarrierTransfer,
    Benchmark::Logistic,
    Benchmark::Kink,
    Benchmark::Bell,
];

/// The closed-form solution has vanishing defect.
pub fn exact_defect(b: Benchmark, eps: f64, tol: f64) -> Check {
    let p = ProblemSpec::new(b, eps).map_err(|e| e.to_string())?;
    let d = max_defect(&p, &Exact(&p), &p.grid()).ok_or("evaluation failed")?;
    if d < tol {
        Ok(())
    } else {
        Err(format!("{} eps={eps}: D = {d:e}", b.name()))
    }
}

/// `Δ = δ D` holds on a report.
pub fn ratio_identity(r: &DefectReport) -> Check {
    match (r.max_error, r.ratio) {
        (Some(e), Some(q)) if (e - q * r.max_defect).abs() > 1e-12 * e.max(1e-300) => {
            Err(format!("Delta = {e}, delta * D = {}", q * r.max_defect))
        }
        (Some(_), None) if r.max_defect > 0.0 => Err("ratio missing".into()),
        _ => Ok(()),
    }
}

struct Perturbed<'a>(&'a ProblemSpec, f64);

impl Profile for Perturbed<'_> {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        let mut d = self.0.exact(s).unwrap();
        d.value *= 1.0 + self.1 * (s * 0.7).sin();
        Ok(d)
    }
}

/// A report for a perturbed exact solution.
pub fn perturbed_report(b: Benchmark, eps: f64, amplitude: f64) -> DefectReport {
    let p = ProblemSpec::new(b, eps).unwrap().with_grid_points(201).unwrap();
    error(&p, &Perturbed(&p, amplitude), &Exact(&p), &p.grid(), 0)
}
