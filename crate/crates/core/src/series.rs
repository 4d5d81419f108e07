//! Truncated power series and order-by-order series generation.
//!
//! A [`TruncatedSeries`] holds `a_0..a_K` as complex numbers. Arithmetic
//! keeps the truncation order; operands must agree on it.
//!
//! ```
//! use factor_approx::series::TruncatedSeries;
//!
//! let s = TruncatedSeries::from_real(&[1.0, 1.0, 0.0, 0.0]);
//! let l = s.log().unwrap();
//! assert!((l.coeff(3).re - 1.0 / 3.0).abs() < 1e-15);
//! ```

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients `a_0..a_K` of a power series truncated at order `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
    variable: &'static str,
}

impl TruncatedSeries {
    /// Builds a series from its coefficients. The order is `coeffs.len() - 1`.
    ///
    /// # Panics
    ///
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least a_0");
        Self {
            coeffs,
            variable: "x",
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(order: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); order + 1])
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = Complex64::new(1.0, 0.0);
        s
    }

    /// Attaches a label for the expansion variable. Purely descriptive.
    pub fn with_variable(mut self, name: &'static str) -> Self {
        self.variable = name;
        self
    }

    pub fn variable(&self) -> &'static str {
        self.variable
    }

    /// Truncation order `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `a_n`, or zero beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// The same series cut down to order `order` (which must not exceed the current one).
    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        Self {
            coeffs: self.coeffs[..=order].to_vec(),
            variable: self.variable,
        }
    }

    /// True when every imaginary part is below `tol * max(1, |a_n|)`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.im.abs() <= tol * c.norm().max(1.0))
    }

    /// Horner evaluation of the polynomial part.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    fn like(&self, coeffs: Vec<Complex64>) -> Self {
        Self {
            coeffs,
            variable: self.variable,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.like(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.like(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.like(self.coeffs.iter().map(|a| a * factor).collect())
    }

    /// Cauchy product truncated at order `K`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.like(cauchy(&self.coeffs, &other.coeffs)))
    }

    /// Quotient `self / other`; needs `other.a_0 != 0`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let t0 = other.coeffs[0];
        if t0 == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroConstantTerm);
        }
        let k = self.order();
        let mut q = vec![Complex64::new(0.0, 0.0); k + 1];
        for n in 0..=k {
            let mut acc = self.coeffs[n];
            for j in 1..=n {
                acc -= other.coeffs[j] * q[n - j];
            }
            q[n] = acc / t0;
        }
        Ok(self.like(q))
    }

    /// `ln s(x)` with constant term `ln a_0` (principal branch); needs `a_0 != 0`.
    pub fn log(&self) -> Result<Self> {
        let s0 = self.coeffs[0];
        if s0 == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroConstantTerm);
        }
        let k = self.order();
        let mut l = vec![Complex64::new(0.0, 0.0); k + 1];
        l[0] = s0.ln();
        for n in 1..=k {
            let mut acc = self.coeffs[n] * n as f64;
            for j in 1..n {
                acc -= l[j] * self.coeffs[n - j] * j as f64;
            }
            l[n] = acc / (s0 * n as f64);
        }
        Ok(self.like(l))
    }

    /// `exp s(x)`.
    pub fn exp(&self) -> Self {
        let k = self.order();
        let mut e = vec![Complex64::new(0.0, 0.0); k + 1];
        e[0] = self.coeffs[0].exp();
        for n in 1..=k {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=n {
                acc += self.coeffs[j] * e[n - j] * j as f64;
            }
            e[n] = acc / n as f64;
        }
        self.like(e)
    }

    /// Term-by-term derivative; the result has order `K - 1` (order 0 stays 0).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return self.like(vec![Complex64::new(0.0, 0.0)]);
        }
        self.like(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, a)| a * n as f64)
                .collect(),
        )
    }

    /// Factors out the leading monomial of a series in `x^power`.
    ///
    /// With `leading_power` = σ, the raw series is written as
    /// `c x^σ (1 + b_1 x^power + b_2 x^(2 power) + ...)`. Coefficients below
    /// σ and those off the `x^power` lattice must vanish.
    pub fn normalize(&self, leading_power: usize, power: u32) -> Result<(Prefactor, TruncatedSeries)> {
        let power_us = power.max(1) as usize;
        if leading_power > self.order() {
            return Err(Error::ZeroConstantTerm);
        }
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
        for (i, c) in self.coeffs.iter().enumerate().take(leading_power) {
            if c.norm() > tol {
                return Err(Error::NotInPower {
                    power,
                    index: i,
                    value: c.norm(),
                });
            }
        }
        let c = self.coeffs[leading_power];
        if c.norm() <= tol || c == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroConstantTerm);
        }
        let kn = (self.order() - leading_power) / power_us;
        let mut b = Vec::with_capacity(kn + 1);
        for (j, a) in self.coeffs.iter().enumerate().skip(leading_power) {
            let off = j - leading_power;
            if off.is_multiple_of(power_us) {
                if off / power_us <= kn {
                    b.push(a / c);
                }
            } else if a.norm() > tol {
                return Err(Error::NotInPower {
                    power,
                    index: j,
                    value: a.norm(),
                });
            }
        }
        let prefactor = if leading_power == 0 && c == Complex64::new(1.0, 0.0) {
            Prefactor::unit()
        } else {
            Prefactor::power(c, leading_power as i32)
        };
        Ok((prefactor, TruncatedSeries::new(b).with_variable(self.variable)))
    }
}

/// Cauchy product of two equal-length coefficient slices, truncated to that length.
fn cauchy(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().min(b.len());
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for (i, ai) in a.iter().enumerate().take(n) {
        if *ai == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(n - i) {
            c[i + j] += ai * bj;
        }
    }
    c
}

/// Closed form of the factored-out zeroth-order behaviour `f_0(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorTag {
    /// `f_0(x) = c x^σ`.
    Power,
    /// `f_0(x) = 1`.
    Unit,
}

/// Leading behaviour `f_0(x) = c x^σ` split off before normalization.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Prefactor {
    pub leading_scale: Complex64,
    pub zero_exponent: i32,
    /// Large-`x` exponent α of `f_0`, when `f_0` is a pure power.
    pub infinity_exponent: Option<i32>,
    pub functional_tag: PrefactorTag,
}

impl Prefactor {
    pub fn unit() -> Self {
        Self {
            leading_scale: Complex64::new(1.0, 0.0),
            zero_exponent: 0,
            infinity_exponent: Some(0),
            functional_tag: PrefactorTag::Unit,
        }
    }

    pub fn power(scale: Complex64, exponent: i32) -> Self {
        Self {
            leading_scale: scale,
            zero_exponent: exponent,
            infinity_exponent: Some(exponent),
            functional_tag: PrefactorTag::Power,
        }
    }

    /// `f_0(x)`, `f_0'(x)` and `f_0''(x)`.
    pub fn eval_with_derivatives(&self, x: Complex64) -> [Complex64; 3] {
        let c = self.leading_scale;
        let s = self.zero_exponent;
        let sf = s as f64;
        let p0 = c * x.powi(s);
        let p1 = if s == 0 { Complex64::new(0.0, 0.0) } else { c * sf * x.powi(s - 1) };
        let p2 = if s == 0 || s == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            c * sf * (sf - 1.0) * x.powi(s - 2)
        };
        [p0, p1, p2]
    }
}

/// Deterministic generator of truncated series, possibly depending on free
/// parameters θ (shooting values).
pub trait SeriesOracle: Send + Sync {
    fn parameter_names(&self) -> Vec<String>;

    /// Raw series of order `order` for parameters `theta`. Coefficients
    /// through order `K` must not depend on the requested order.
    fn series(&self, order: usize, theta: &[f64]) -> Result<TruncatedSeries>;
}

/// An ODE whose residual is a polynomial in the unknown, its derivatives and
/// the independent variable, expanded about `x = 0`.
pub trait PolynomialOde: Send + Sync {
    /// Labels of the free parameters consumed by [`PolynomialOde::leading`].
    fn parameter_names(&self) -> Vec<String> {
        Vec::new()
    }

    /// Gap `d` such that `a_m` is fixed by the residual coefficient of `x^(m-d)`.
    fn index_lag(&self) -> usize;

    /// Coefficients fixed directly by the conditions at the expansion point.
    fn leading(&self, theta: &[f64]) -> Vec<Complex64>;

    /// Residual series for the trial coefficients `a`, truncated to `a.len()` terms.
    fn residual(&self, a: &Jet) -> Jet;
}

/// Adapter presenting a [`PolynomialOde`] as a [`SeriesOracle`].
#[derive(Debug, Clone)]
pub struct OdeOracle<P>(pub P);

impl<P: PolynomialOde> SeriesOracle for OdeOracle<P> {
    fn parameter_names(&self) -> Vec<String> {
        self.0.parameter_names()
    }

    fn series(&self, order: usize, theta: &[f64]) -> Result<TruncatedSeries> {
        series_from_ode(&self.0, order, theta)
    }
}

/// Solves for `a_0..a_order` by undetermined coefficients.
///
/// For each new `a_m` the residual coefficient of `x^(m-d)` is evaluated at
/// `a_m = 0` and `a_m = 1` on the prefix `a_0..a_m` alone, so the result
/// never depends on the requested order.
pub fn series_from_ode<P: PolynomialOde + ?Sized>(
    ode: &P,
    order: usize,
    theta: &[f64],
) -> Result<TruncatedSeries> {
    let lag = ode.index_lag();
    let mut a = ode.leading(theta);
    a.truncate(order + 1);
    if a.len() < lag.min(order + 1) {
        return Err(Error::UnderDetermined { order: a.len() });
    }
    while a.len() <= order {
        let m = a.len();
        let j = m - lag;
        a.push(Complex64::new(0.0, 0.0));
        let r0 = ode.residual(&Jet(a.clone())).0[j];
        a[m] = Complex64::new(1.0, 0.0);
        let r1 = ode.residual(&Jet(a.clone())).0[j];
        let slope = r1 - r0;
        let size = 1.0 + r0.norm() + r1.norm();
        if slope.norm() <= 1e-13 * size {
            return Err(if r0.norm() <= 1e-13 * size {
                Error::UnderDetermined { order: m }
            } else {
                Error::UnsupportedProblem { order: m }
            });
        }
        a[m] = -r0 / slope;
    }
    Ok(TruncatedSeries::new(a))
}

/// Fixed-length coefficient vector used to write ODE residuals compactly.
///
/// All operations truncate to the common length; [`Jet::d`] pads the last
/// coefficient with zero, so index `i` of a derivative is exact for `i < len - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<Complex64>);

impl Jet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Constant-plus-linear polynomial `c0 + c1 x` of the same length.
    pub fn affine(&self, c0: f64, c1: f64) -> Jet {
        let mut v = vec![Complex64::new(0.0, 0.0); self.len()];
        if let Some(x) = v.get_mut(0) {
            *x = c0.into();
        }
        if let Some(x) = v.get_mut(1) {
            *x = c1.into();
        }
        Jet(v)
    }

    /// Derivative with zero padding at the top.
    pub fn d(&self) -> Jet {
        let n = self.len();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n.saturating_sub(1) {
            v[i] = self.0[i + 1] * (i + 1) as f64;
        }
        Jet(v)
    }

    /// Multiplication by `x^k`.
    pub fn x(&self, k: usize) -> Jet {
        let n = self.len();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in k..n {
            v[i] = self.0[i - k];
        }
        Jet(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in self.0.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        Jet(cauchy(&self.0, &rhs.0))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, mut rhs: Jet) -> Jet {
        for a in rhs.0.iter_mut() {
            *a *= self;
        }
        rhs
    }
}
