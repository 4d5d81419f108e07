//! Root approximants of the vortex core profile, the baseline that factor
//! approximants are compared against for `gp_vortex`.
//!
//! `R_k(r) = (r / c) (1 + d_1 r² + … + d_{k-1} r^{2(k-1)})^{-1/m}` with
//! `m = 2(k-1)`. The coefficients are exact rationals; `c` enters through
//! `c^m`, which is rational too.

use num_rational::Ratio;

use crate::diagnostics::{defect, DefectReport, Profile};
use crate::error::{Error, Result};
use crate::factor::Derivatives;
use crate::problems::{Benchmark, ProblemSpec};

type Q = Ratio<i64>;

/// Orders with a closed form available.
pub const ROOT_ORDERS: std::ops::RangeInclusive<usize> = 2..=6;

#[derive(Debug, Clone, PartialEq)]
pub struct RootForm {
    pub order: usize,
    /// `c^m`.
    pub scale_power: Q,
    /// Coefficients of the inner polynomial in `r²`, constant term first (always 1).
    pub polynomial: Vec<Q>,
    /// `-1/m`.
    pub outer_exponent: Q,
}

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// Closed-form root approximant of order `k`.
///
/// Orders 2 to 5 are the classical forms. Order 6 follows the rule they all
/// obey: `d_1 = (k-1)/4` fixes the `r³` term of the small-r series, and the
/// remaining coefficients reproduce the large-r expansion
/// `1 - r⁻²/2 - 9r⁻⁴/8 - 161r⁻⁶/16 - 24661r⁻⁸/128 - …` through `r^{-2(k-2)}`.
pub fn root_approximant(k: usize) -> Result<RootForm> {
    let (scale_power, tail): (Q, Vec<Q>) = match k {
        2 => (q(4, 1), vec![q(1, 4)]),
        3 => (q(4, 1), vec![q(1, 2), q(1, 4)]),
        4 => (q(16, 1), vec![q(3, 4), q(3, 16), q(1, 16)]),
        5 => (q(136, 1), vec![q(1, 1), q(9, 68), q(1, 34), q(1, 136)]),
        6 => (q(2224, 1), vec![q(5, 4), q(95, 1112), q(25, 2224), q(5, 2224), q(1, 2224)]),
        _ => {
            return Err(Error::UnsupportedOrder {
                problem: "root approximant".into(),
                order: k,
                allowed: "2..=6".into(),
            })
        }
    };
    let m = 2 * (k as i64 - 1);
    let mut polynomial = vec![q(1, 1)];
    polynomial.extend(tail);
    Ok(RootForm { order: k, scale_power, polynomial, outer_exponent: q(-1, m) })
}

fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

impl RootForm {
    /// `m = 2(k-1)`.
    pub fn root_index(&self) -> u32 {
        (2 * (self.order - 1)) as u32
    }

    /// `c`.
    pub fn scale(&self) -> f64 {
        to_f64(self.scale_power).powf(1.0 / self.root_index() as f64)
    }

    /// Value and first two derivatives at `r`.
    pub fn eval(&self, r: f64) -> Derivatives {
        let u = r * r;
        let (mut p, mut p1, mut p2) = (0.0, 0.0, 0.0);
        for &d in self.polynomial.iter().rev() {
            let d = to_f64(d);
            p2 = p2 * u + 2.0 * p1;
            p1 = p1 * u + p;
            p = p * u + d;
        }
        // p, p1, p2 are P(u), P'(u), P''(u).
        let a = -to_f64(self.outer_exponent);
        let c = self.scale();
        let qv = p.powf(-a) / c;
        let dp = 2.0 * r * p1;
        let ddp = 2.0 * p1 + 4.0 * u * p2;
        let q1 = -a * qv * dp / p;
        let q2 = a * (a + 1.0) * qv * dp * dp / (p * p) - a * qv * ddp / p;
        Derivatives { value: r * qv, first: qv + r * q1, second: 2.0 * q1 + r * q2 }
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        self.eval(r).value
    }
}

impl Profile for RootForm {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        Ok(RootForm::eval(self, s))
    }
}

/// Defect of `R_k` in the vortex equation on `grid`.
pub fn defect_of_root(k: usize, grid: &[f64]) -> Result<DefectReport> {
    let form = root_approximant(k)?;
    let spec = ProblemSpec::new(Benchmark::GpVortex, 1.0)?;
    Ok(defect(&spec, &form, grid, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coefficients of `f^a` for a power series `f` with `f_0 = 1`.
    fn power(f: &[Q], a: Q, n: usize) -> Vec<Q> {
        let mut g = vec![q(1, 1)];
        for k in 1..n {
            let mut s = q(0, 1);
            for j in 1..=k.min(f.len() - 1) {
                s += ((a + 1) * j as i64 - k as i64) * f[j] * g[k - j];
            }
            g.push(s / k as i64);
        }
        g
    }

    /// Large-r series of `R_k` in `t = r⁻²`, computed symbolically.
    fn large_r(form: &RootForm, n: usize) -> Vec<Q> {
        let top = *form.polynomial.last().unwrap();
        assert_eq!(form.scale_power * top, q(1, 1));
        let reversed: Vec<Q> = form.polynomial.iter().rev().map(|&d| d / top).collect();
        power(&reversed, form.outer_exponent, n)
    }

    const FAR_FIELD: [(i64, i64); 5] = [(1, 1), (-1, 2), (-9, 8), (-161, 16), (-24661, 128)];

    #[test]
    #[allow(clippy::approx_constant)]
    fn r2_by_substitution() {
        let f = root_approximant(2).unwrap();
        assert!((f.evaluate(2.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((f.evaluate(2.0) - 0.707107).abs() < 1e-6);
    }

    #[test]
    fn tends_to_one() {
        for k in ROOT_ORDERS {
            let f = root_approximant(k).unwrap();
            assert!((f.evaluate(1e4) - 1.0).abs() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn large_r_expansion_through_construction_order() {
        for k in ROOT_ORDERS {
            let series = large_r(&root_approximant(k).unwrap(), k - 1);
            for (j, &(n, d)) in FAR_FIELD.iter().enumerate().take(k - 1) {
                assert_eq!(series[j], q(n, d), "k = {k}, t^{j}");
            }
        }
        // One order further the match stops.
        let r3 = large_r(&root_approximant(3).unwrap(), 3);
        assert_eq!(r3[2], q(-3, 8));
    }

    #[test]
    fn small_r_cubic_term() {
        // R_k = (r/c)(1 - r²/8 + …): the vortex equation's own cubic ratio.
        for k in ROOT_ORDERS {
            let f = root_approximant(k).unwrap();
            let m = f.root_index() as i64;
            assert_eq!(f.polynomial[1] * f.outer_exponent, q(-1, 8));
            assert_eq!(f.outer_exponent, q(-1, m));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for k in ROOT_ORDERS {
            let f = root_approximant(k).unwrap();
            for r in [0.3, 1.0, 2.5, 7.0] {
                let d = f.eval(r);
                let (lo, hi) = (f.eval(r - h), f.eval(r + h));
                assert!(((hi.value - lo.value) / (2.0 * h) - d.first).abs() < 1e-8);
                assert!(((hi.first - lo.first) / (2.0 * h) - d.second).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn positive_on_the_half_line() {
        for k in ROOT_ORDERS {
            let f = root_approximant(k).unwrap();
            assert!((1..2000).all(|i| f.evaluate(i as f64 * 0.01) > 0.0));
        }
    }

    #[test]
    fn defect_peaks_near_one() {
        let grid = crate::problems::uniform_grid(0.0, 20.0, 2001);
        for k in 3..=5 {
            let r = defect_of_root(k, &grid).unwrap();
            assert!((0.5..=2.0).contains(&r.argmax_defect), "k = {k}: {}", r.argmax_defect);
        }
        // The lowest order peaks further out.
        let r2 = defect_of_root(2, &grid).unwrap();
        assert!((2.0..3.0).contains(&r2.argmax_defect));
        assert!(matches!(root_approximant(7), Err(Error::UnsupportedOrder { .. })));
    }
}
