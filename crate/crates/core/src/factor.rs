//! Factor approximants `f(x) = c x^σ Π (1 + A_i x^s)^{n_i}`.
//!
//! The parameters are fitted to moments `B_m = Σ n_i A_i^m` by a Prony
//! reduction: the nodes `A_i` are the roots of the polynomial annihilating
//! the moment sequence, the exponents `n_i` follow from a Vandermonde
//! system, and a Gauss-Newton pass polishes everything against all moments.
//!
//! With an even number of moments every node is free. With an odd number the
//! first node is pinned to `A_1 = 1`, which adds the linear condition
//! `P(1) = 0` to the Hankel system.
//!
//! ```
//! use factor_approx::factor::solve_even;
//! use factor_approx::moments::MomentVector;
//!
//! // Moments of 1/(1 + x).
//! let f = solve_even(&MomentVector::from_real(&[-1.0, -1.0])).unwrap();
//! assert!((f.evaluate(1.0).unwrap() - 0.5).abs() < 1e-14);
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::{moments_from_series, MomentVector};
use crate::series::{Prefactor, TruncatedSeries};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative size below which a recovered node is treated as the confluent
/// `A -> 0` limit.
pub const NODE_ZERO_TOL: f64 = 1e-8;

/// Relative tolerance for pairing conjugate nodes.
pub const PAIRING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// `(1 + A x^s)^n`.
    Power,
    /// `exp(b x^s)`, the limit of `(1 + A x^s)^{b/A}` as `A -> 0`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factor {
    pub kind: FactorKind,
    /// Node `A` (zero for exponential factors).
    pub node: Complex64,
    /// Exponent `n` (zero for exponential factors).
    pub exponent: Complex64,
    /// Rate `b` (zero for power factors).
    pub rate: Complex64,
}

impl Factor {
    pub fn power(node: Complex64, exponent: Complex64) -> Self {
        Self {
            kind: FactorKind::Power,
            node,
            exponent,
            rate: ZERO,
        }
    }

    pub fn exponential(rate: Complex64) -> Self {
        Self {
            kind: FactorKind::Exponential,
            node: ZERO,
            exponent: ZERO,
            rate,
        }
    }

    /// Contribution to the power sum `B_m`.
    pub fn moment(&self, m: usize) -> Complex64 {
        match self.kind {
            FactorKind::Power => self.exponent * self.node.powi(m as i32),
            FactorKind::Exponential if m == 1 => self.rate,
            FactorKind::Exponential => ZERO,
        }
    }
}

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// A fitted approximant `c x^σ Π factors`, each factor in the variable `x^power`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorForm {
    pub prefactor: Prefactor,
    /// Exponent `s` of the expansion variable `x^s` inside every factor.
    pub power: u32,
    pub factors: Vec<Factor>,
    /// Order of the normalized series the form was matched to.
    pub order: usize,
    /// Whether the source moments were real and the factors close under conjugation.
    pub real: bool,
    /// Relative residual of the moment equations after polishing.
    pub residual: f64,
}

/// Tolerances for moment fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct FitOptions {
    /// Accept a fit when the relative moment residual is below this.
    pub accept_tol: f64,
    /// Stop Gauss-Newton once the relative residual is below this.
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            accept_tol: 1e-10,
            newton_tol: 1e-12,
            max_iter: 50,
        }
    }
}

/// Fits factors to moments of even count `2p` (all nodes free).
pub fn solve_even(b: &MomentVector) -> Result<FactorForm> {
    if b.first_index() != 1 || b.is_empty() || !b.len().is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "solve_even needs B_1..B_2p, got {} moments",
            b.len()
        )));
    }
    solve_moments(b, &FitOptions::default())
}

/// Fits factors to moments of odd count `2p + 1`, with `A_1 = 1`.
pub fn solve_odd(b: &MomentVector) -> Result<FactorForm> {
    if b.first_index() != 1 || b.len() % 2 != 1 {
        return Err(Error::InvalidParameter(format!(
            "solve_odd needs B_1..B_2p+1, got {} moments",
            b.len()
        )));
    }
    solve_moments(b, &FitOptions::default())
}

/// Fits factors to any moment vector; parity decides whether `A_1 = 1` is pinned.
/// The result has a unit prefactor and factors in `x`.
pub fn solve_moments(b: &MomentVector, opts: &FitOptions) -> Result<FactorForm> {
    let fit = fit_moments(b, opts)?;
    Ok(FactorForm {
        prefactor: Prefactor::unit(),
        power: 1,
        factors: fit.factors,
        order: b.order(),
        real: fit.real,
        residual: fit.residual,
    })
}

/// Moments of a normalized series, then [`solve_moments`], reattaching `prefactor`.
pub fn from_series(prefactor: Prefactor, power: u32, s: &TruncatedSeries) -> Result<FactorForm> {
    let b = moments_from_series(s)?;
    let mut f = solve_moments(&b, &FitOptions::default())?;
    f.prefactor = prefactor;
    f.power = power;
    Ok(f)
}

/// Outcome of a moment fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub factors: Vec<Factor>,
    pub residual: f64,
    pub real: bool,
}

/// Fits factors to `b`, deflating to fewer parameters when the full Prony
/// system is singular or its solution does not reproduce every moment.
pub fn fit_moments(b: &MomentVector, opts: &FitOptions) -> Result<Fit> {
    let n = b.len();
    let m = b.values();
    let start = b.first_index();
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.norm()));
    let real = b.is_real(1e-12);
    if m.iter().all(|v| v.norm() <= opts.accept_tol * scale) {
        return Ok(Fit {
            factors: Vec::new(),
            residual: 0.0,
            real,
        });
    }
    let mut best = f64::INFINITY;
    let mut singular = true;
    for params in (1..=n).rev() {
        let free = params / 2;
        let unit = params % 2 == 1;
        let Some(factors) = prony(m, start, free, unit) else {
            continue;
        };
        singular = false;
        let mut factors = factors;
        let res = gauss_newton(&mut factors, m, start, opts);
        if res > opts.accept_tol {
            best = best.min(res);
            continue;
        }
        let (factors, real_ok) = if real {
            let (f, ok) = conjugate_close(factors);
            (f, ok)
        } else {
            (factors, false)
        };
        let factors = drop_negligible(factors, m, start, opts.accept_tol);
        let residual = residual_norm(&factors, m, start);
        if residual > opts.accept_tol {
            best = best.min(residual);
            continue;
        }
        return Ok(Fit {
            factors: sort_factors(factors),
            residual,
            real: real && real_ok,
        });
    }
    if singular {
        Err(Error::DegenerateMoments(format!(
            "no regular Prony system among {n} moments"
        )))
    } else {
        Err(Error::NoSolution { residual: best })
    }
}

/// Initial nodes and weights from the first `2 free + unit` moments.
fn prony(m: &[Complex64], start: usize, free: usize, unit: bool) -> Option<Vec<Factor>> {
    let deg = free + usize::from(unit);
    let params = 2 * free + usize::from(unit);
    if deg == 0 || params > m.len() {
        return None;
    }
    let mut h = DMatrix::<Complex64>::zeros(deg, deg);
    let mut rhs = DVector::<Complex64>::zeros(deg);
    for i in 0..free {
        for j in 0..deg {
            h[(i, j)] = m[i + j];
        }
        rhs[i] = -m[i + deg];
    }
    if unit {
        for j in 0..deg {
            h[(deg - 1, j)] = ONE;
        }
        rhs[deg - 1] = -ONE;
    }
    let c = linalg::solve_square(h, rhs)?;
    let mut nodes = linalg::monic_roots(c.as_slice())?;
    let unit_idx = if unit {
        let i = (0..deg).min_by(|&a, &b| {
            (nodes[a] - ONE)
                .norm()
                .total_cmp(&(nodes[b] - ONE).norm())
        })?;
        nodes[i] = ONE;
        Some(i)
    } else {
        None
    };
    let rho = m
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let k = start + i;
            (k >= 1).then(|| v.norm().powf(1.0 / k as f64))
        })
        .fold(0.0f64, f64::max);
    let amax = nodes.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let zero_tol = NODE_ZERO_TOL * amax.max(rho);
    let exponential: Vec<bool> = nodes
        .iter()
        .enumerate()
        .map(|(i, a)| Some(i) != unit_idx && a.norm() <= zero_tol)
        .collect();
    if start == 0 && exponential.iter().any(|&e| e) {
        return None;
    }
    if exponential.iter().filter(|&&e| e).count() > 1 {
        return None;
    }
    let mut v = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 0..deg {
        let k = start + i;
        for (j, a) in nodes.iter().enumerate() {
            v[(i, j)] = if exponential[j] {
                if k == 1 { ONE } else { ZERO }
            } else {
                a.powi(k as i32)
            };
        }
    }
    let rhs = DVector::from_iterator(deg, m[..deg].iter().copied());
    let w = linalg::solve_square(v, rhs)?;
    Some(
        nodes
            .iter()
            .zip(w.iter())
            .zip(&exponential)
            .map(|((&a, &wj), &e)| {
                if e {
                    Factor::exponential(wj)
                } else {
                    Factor::power(a, wj)
                }
            })
            .collect(),
    )
}

fn residual_vec(factors: &[Factor], m: &[Complex64], start: usize) -> DVector<Complex64> {
    DVector::from_iterator(
        m.len(),
        m.iter().enumerate().map(|(i, b)| {
            factors.iter().map(|f| f.moment(start + i)).sum::<Complex64>() - b
        }),
    )
}

fn residual_norm(factors: &[Factor], m: &[Complex64], start: usize) -> f64 {
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.norm()));
    let r = residual_vec(factors, m, start);
    let v = r.iter().fold(0.0f64, |a, x| a.max(x.norm())) / scale;
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Pinned unit nodes keep `A = 1`; every other parameter moves.
fn is_pinned(f: &Factor) -> bool {
    f.kind == FactorKind::Power && f.node == ONE
}

fn gauss_newton(factors: &mut [Factor], m: &[Complex64], start: usize, opts: &FitOptions) -> f64 {
    let mut res = residual_norm(factors, m, start);
    for _ in 0..opts.max_iter {
        if res <= opts.newton_tol {
            break;
        }
        let cols: usize = factors
            .iter()
            .map(|f| match f.kind {
                FactorKind::Power if !is_pinned(f) => 2,
                _ => 1,
            })
            .sum();
        let mut j = DMatrix::<Complex64>::zeros(m.len(), cols);
        for i in 0..m.len() {
            let k = start + i;
            let mut col = 0;
            for f in factors.iter() {
                match f.kind {
                    FactorKind::Exponential => {
                        j[(i, col)] = if k == 1 { ONE } else { ZERO };
                        col += 1;
                    }
                    FactorKind::Power => {
                        j[(i, col)] = f.node.powi(k as i32);
                        col += 1;
                        if !is_pinned(f) {
                            j[(i, col)] = if k == 0 {
                                ZERO
                            } else {
                                f.exponent * k as f64 * f.node.powi(k as i32 - 1)
                            };
                            col += 1;
                        }
                    }
                }
            }
        }
        let r = residual_vec(factors, m, start);
        let Some(step) = linalg::least_squares(j, &(-r)) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..10 {
            let trial = apply_step(factors, &step, t);
            let rt = residual_norm(&trial, m, start);
            if rt < res {
                factors.copy_from_slice(&trial);
                res = rt;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    res
}

fn apply_step(factors: &[Factor], step: &DVector<Complex64>, t: f64) -> Vec<Factor> {
    let mut col = 0;
    factors
        .iter()
        .map(|f| {
            let mut g = *f;
            match f.kind {
                FactorKind::Exponential => {
                    g.rate += step[col] * t;
                    col += 1;
                }
                FactorKind::Power => {
                    g.exponent += step[col] * t;
                    col += 1;
                    if !is_pinned(f) {
                        g.node += step[col] * t;
                        col += 1;
                    }
                }
            }
            g
        })
        .collect()
}

/// Makes a factor set from real moments exactly conjugation-symmetric.
/// Returns `false` when some complex node has no partner.
fn conjugate_close(mut factors: Vec<Factor>) -> (Vec<Factor>, bool) {
    let n = factors.len();
    let mut done = vec![false; n];
    for i in 0..n {
        let f = &mut factors[i];
        let realish = match f.kind {
            FactorKind::Exponential => true,
            FactorKind::Power => f.node.im.abs() <= 1e-10 * f.node.norm(),
        };
        if realish {
            f.node.im = 0.0;
            f.exponent.im = 0.0;
            f.rate.im = 0.0;
            done[i] = true;
        }
    }
    let mut ok = true;
    for i in 0..n {
        if done[i] {
            continue;
        }
        let target = factors[i].node.conj();
        let partner = (0..n)
            .filter(|&j| j != i && !done[j])
            .min_by(|&a, &b| {
                (factors[a].node - target)
                    .norm()
                    .total_cmp(&(factors[b].node - target).norm())
            });
        match partner {
            Some(j) if (factors[j].node - target).norm() <= PAIRING_TOL * target.norm().max(1.0) => {
                let a = (factors[i].node + factors[j].node.conj()) * 0.5;
                let e = (factors[i].exponent + factors[j].exponent.conj()) * 0.5;
                factors[i].node = a;
                factors[i].exponent = e;
                factors[j].node = a.conj();
                factors[j].exponent = e.conj();
                done[i] = true;
                done[j] = true;
            }
            _ => {
                ok = false;
                done[i] = true;
            }
        }
    }
    (factors, ok)
}

/// Removes factors with vanishing exponent or rate when the fit survives it.
fn drop_negligible(factors: Vec<Factor>, m: &[Complex64], start: usize, tol: f64) -> Vec<Factor> {
    let kept: Vec<Factor> = factors
        .iter()
        .copied()
        .filter(|f| match f.kind {
            FactorKind::Power => f.exponent.norm() > 1e-11,
            FactorKind::Exponential => f.rate.norm() > 1e-14,
        })
        .collect();
    if kept.len() < factors.len() && residual_norm(&kept, m, start) <= tol {
        kept
    } else {
        factors
    }
}

/// Pinned unit node first, then power nodes by real then imaginary part, exponentials last.
fn sort_factors(mut factors: Vec<Factor>) -> Vec<Factor> {
    factors.sort_by(|a, b| {
        let key = |f: &Factor| match f.kind {
            FactorKind::Power if f.node == ONE => 0,
            FactorKind::Power => 1,
            FactorKind::Exponential => 2,
        };
        key(a)
            .cmp(&key(b))
            .then(a.node.re.total_cmp(&b.node.re))
            .then(a.node.im.total_cmp(&b.node.im))
    });
    factors
}

impl FactorForm {
    /// Complex value and derivatives on the principal branch.
    pub fn eval_complex(&self, x: f64) -> Result<[Complex64; 3]> {
        let s = self.power as i32;
        let sf = s as f64;
        let xc = Complex64::new(x, 0.0);
        let mut log_g = ZERO;
        let mut l1 = ZERO;
        let mut l2 = ZERO;
        let xs = xc.powi(s);
        let xs1 = xc.powi(s - 1);
        let xs2 = if s >= 2 { xc.powi(s - 2) } else { ZERO };
        for f in &self.factors {
            match f.kind {
                FactorKind::Exponential => {
                    log_g += f.rate * xs;
                    l1 += f.rate * sf * xs1;
                    l2 += f.rate * sf * (sf - 1.0) * xs2;
                }
                FactorKind::Power => {
                    let base = ONE + f.node * xs;
                    if base == ZERO {
                        return Err(Error::BranchCut { x });
                    }
                    let n = f.exponent;
                    let real_factor = f.node.im == 0.0 && n.im == 0.0;
                    if real_factor && base.re < 0.0 && n.re.fract() != 0.0 {
                        return Err(Error::BranchCut { x });
                    }
                    let du = f.node * sf * xs1;
                    let ddu = f.node * sf * (sf - 1.0) * xs2;
                    log_g += n * base.ln();
                    l1 += n * du / base;
                    l2 += n * (ddu / base - du * du / (base * base));
                }
            }
        }
        let g = log_g.exp();
        let g1 = g * l1;
        let g2 = g * (l2 + l1 * l1);
        let [p0, p1, p2] = self.prefactor.eval_with_derivatives(xc);
        Ok([p0 * g, p1 * g + p0 * g1, p2 * g + 2.0 * p1 * g1 + p0 * g2])
    }

    /// Real value and first two derivatives.
    pub fn evaluate_with_derivatives(&self, x: f64) -> Result<Derivatives> {
        let v = self.eval_complex(x)?;
        for z in &v {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::BranchCut { x });
            }
            if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
                return Err(Error::ConjugationBroken {
                    x,
                    residue: z.im.abs(),
                });
            }
        }
        Ok(Derivatives {
            value: v[0].re,
            first: v[1].re,
            second: v[2].re,
        })
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        let v = self.eval_complex(x)?[0];
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::BranchCut { x });
        }
        if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
            return Err(Error::ConjugationBroken {
                x,
                residue: v.im.abs(),
            });
        }
        Ok(v.re)
    }

    /// Maclaurin series of the factor product in the variable `y = x^s`.
    pub fn expand(&self, order: usize) -> TruncatedSeries {
        let mut l = vec![ZERO; order + 1];
        for f in &self.factors {
            match f.kind {
                FactorKind::Exponential => {
                    if order >= 1 {
                        l[1] += f.rate;
                    }
                }
                FactorKind::Power => {
                    let mut ak = ONE;
                    for (k, lk) in l.iter_mut().enumerate().skip(1) {
                        ak *= f.node;
                        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                        *lk += f.exponent * ak * (sign / k as f64);
                    }
                }
            }
        }
        TruncatedSeries::new(l).exp()
    }

    /// `c Π A_i^{n_i}`, the amplitude of the leading large-variable power.
    pub fn amplitude_at_infinity(&self) -> Result<Complex64> {
        let mut log = ZERO;
        for f in &self.factors {
            if f.kind == FactorKind::Exponential {
                return Err(Error::ExponentialAtInfinity);
            }
            log += f.exponent * f.node.ln();
        }
        Ok(self.prefactor.leading_scale * log.exp())
    }

    /// `α + s Σ n_i`, the exponent of the leading large-variable power.
    pub fn exponent_at_infinity(&self) -> Result<Complex64> {
        let alpha = self.prefactor.infinity_exponent.ok_or_else(|| {
            Error::InvalidParameter("prefactor has no large-variable exponent".into())
        })?;
        let mut sum = ZERO;
        for f in &self.factors {
            if f.kind == FactorKind::Exponential {
                return Err(Error::ExponentialAtInfinity);
            }
            sum += f.exponent;
        }
        Ok(Complex64::new(alpha as f64, 0.0) + sum * self.power as f64)
    }
}

/// Differences between consecutive approximants on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stabilization {
    /// `sup |f_{j+1} - f_j|` for consecutive pairs (infinite when evaluation fails).
    pub differences: Vec<f64>,
    /// Index of the first form from which all later differences stay below the threshold.
    pub stable_from: Option<usize>,
    pub stabilized: bool,
}

/// Threshold on consecutive sup differences for [`detect_fixed_form`].
pub const STABILIZATION_TOL: f64 = 1e-8;

/// Flags exact reconstruction: successive orders returning the same function.
pub fn detect_fixed_form(forms: &[FactorForm], grid: &[f64]) -> Stabilization {
    let values: Vec<Option<Vec<f64>>> = forms
        .iter()
        .map(|f| grid.iter().map(|&x| f.evaluate(x).ok()).collect())
        .collect();
    let differences: Vec<f64> = values
        .windows(2)
        .map(|w| match (&w[0], &w[1]) {
            (Some(a), Some(b)) => a
                .iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
            _ => f64::INFINITY,
        })
        .collect();
    let mut stable_from = None;
    for i in (0..differences.len()).rev() {
        if differences[i] < STABILIZATION_TOL {
            stable_from = Some(i);
        } else {
            break;
        }
    }
    Stabilization {
        stabilized: !differences.is_empty() && stable_from == Some(0),
        differences,
        stable_from,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_moments_give_exponential_factor() {
        let f = solve_even(&MomentVector::from_real(&[-1.0, 0.0])).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].kind, FactorKind::Exponential);
        assert!((f.factors[0].rate - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn reciprocal_moments_give_single_factor() {
        let f = solve_even(&MomentVector::from_real(&[-1.0, -1.0])).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert!((f.factors[0].node - c(1.0, 0.0)).norm() < 1e-14);
        assert!((f.factors[0].exponent - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn single_odd_moment_pins_unit_node() {
        let f = solve_odd(&MomentVector::from_real(&[0.37])).unwrap();
        assert_eq!(f.factors, vec![Factor::power(c(1.0, 0.0), c(0.37, 0.0))]);
    }

    #[test]
    fn parity_is_checked() {
        assert!(solve_even(&MomentVector::from_real(&[1.0])).is_err());
        assert!(solve_odd(&MomentVector::from_real(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn two_node_recovery() {
        let truth = [Factor::power(c(0.4, 0.0), c(1.5, 0.0)), Factor::power(c(-1.3, 0.0), c(-0.7, 0.0))];
        let b: Vec<Complex64> = (1..=4).map(|m| truth.iter().map(|f| f.moment(m)).sum()).collect();
        let f = solve_even(&MomentVector::new(b)).unwrap();
        assert!(f.real);
        assert!((f.factors[0].node - truth[1].node).norm() < 1e-12);
        assert!((f.factors[1].exponent - truth[0].exponent).norm() < 1e-12);
    }

    #[test]
    fn deflation_handles_rank_deficient_moments() {
        // Moments of (1 + 0.5x)^2 presented with four entries.
        let b: Vec<f64> = (1..=4).map(|m| 2.0 * 0.5f64.powi(m)).collect();
        let f = solve_even(&MomentVector::from_real(&b)).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert!((f.factors[0].node - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_moments_give_empty_form() {
        let f = solve_odd(&MomentVector::from_real(&[0.0, 0.0, 0.0])).unwrap();
        assert!(f.factors.is_empty());
        assert_eq!(f.evaluate(3.0).unwrap(), 1.0);
    }

    #[test]
    fn exponential_rate_evaluates() {
        let eps = 0.3;
        let f = FactorForm {
            prefactor: Prefactor::unit(),
            power: 1,
            factors: vec![Factor::exponential(c(-1.0 / eps, 0.0))],
            order: 2,
            real: true,
            residual: 0.0,
        };
        assert!((f.evaluate(eps).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn branch_cut_is_reported() {
        let f = FactorForm {
            prefactor: Prefactor::unit(),
            power: 1,
            factors: vec![Factor::power(c(-1.0, 0.0), c(0.5, 0.0))],
            order: 2,
            real: true,
            residual: 0.0,
        };
        assert!(f.evaluate(0.5).is_ok());
        assert_eq!(f.evaluate(2.0), Err(Error::BranchCut { x: 2.0 }));
    }

    #[test]
    fn lone_complex_node_breaks_conjugation() {
        let f = FactorForm {
            prefactor: Prefactor::unit(),
            power: 1,
            factors: vec![Factor::power(c(0.5, 0.5), c(1.0, 0.0))],
            order: 2,
            real: false,
            residual: 0.0,
        };
        assert!(matches!(f.evaluate(1.0), Err(Error::ConjugationBroken { .. })));
    }

    #[test]
    fn expansion_of_exponential_factor_is_linear_in_log() {
        let f = FactorForm {
            prefactor: Prefactor::unit(),
            power: 1,
            factors: vec![Factor::exponential(c(0.7, 0.0)), Factor::power(c(0.2, 0.0), c(2.0, 0.0))],
            order: 3,
            real: true,
            residual: 0.0,
        };
        let l = f.expand(3).log().unwrap();
        assert!((l.coeff(1) - c(0.7 + 0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn stabilization_of_identical_and_unrelated_forms() {
        let a = solve_even(&MomentVector::from_real(&[-1.0, -1.0])).unwrap();
        let b = solve_even(&MomentVector::from_real(&[0.5, 0.25])).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        assert!(detect_fixed_form(&[a.clone(), a.clone(), a.clone()], &grid).stabilized);
        let report = detect_fixed_form(&[a, b], &grid);
        assert!(!report.stabilized);
        assert!(report.differences[0] > 0.1);
    }
}
