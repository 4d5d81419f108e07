//! Numeric reference solutions: classical RK4 with step doubling until the
//! Richardson estimate meets the tolerance, and shooting for two-point problems.

use serde::Serialize;

use super::Profile;
use crate::constraints::brent_root;
use crate::error::{Error, Result};
use crate::factor::Derivatives;
use crate::problems::{Benchmark, ProblemSpec};

pub const DEFAULT_REFERENCE_TOL: f64 = 1e-10;

const MIN_STEPS: usize = 256;
const MAX_STEPS: usize = 1 << 21;

/// Dense numeric solution on the diagnostic domain (cubic Hermite between nodes).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    #[serde(skip)]
    problem: ProblemSpec,
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    /// Richardson estimate of the nodal error.
    pub estimated_error: f64,
    /// Initial slope found by shooting, for two-point problems.
    pub shooting_slope: Option<f64>,
}

enum Kind {
    Initial([f64; 2]),
    /// Left value, right value; the unknown is the left slope.
    TwoPoint(f64, f64),
}

fn second_order(b: Benchmark) -> bool {
    !matches!(b, Benchmark::CarrierTransfer | Benchmark::Logistic)
}

/// State derivative. First-order problems keep the second component at zero.
fn rhs(p: &ProblemSpec, s: f64, u: [f64; 2]) -> [f64; 2] {
    let e = p.epsilon;
    let [y, y1] = u;
    match p.benchmark {
        Benchmark::LinearSingular => [y1, -(2.0 * y1 + y / e) / e],
        Benchmark::CarrierTransfer => [(1.0 - y) / (e * y + s), 0.0],
        Benchmark::Logistic => [y * (1.0 - y) / e, 0.0],
        Benchmark::BoundaryLayer => [y1, s * (y - y1) / e],
        Benchmark::StokesOseen => [y1, -2.0 * y1 / s - e * y * y1],
        Benchmark::StronglySingular => [y1, -y1 / s - y1 * y1 - e * y * y1],
        _ => [f64::NAN, f64::NAN],
    }
}

fn derivatives(p: &ProblemSpec, s: f64, y: f64, y1: f64) -> Derivatives {
    let e = p.epsilon;
    let second = match p.benchmark {
        Benchmark::CarrierTransfer => {
            let d = e * y + s;
            (-y1 * d - (1.0 - y) * (e * y1 + 1.0)) / (d * d)
        }
        Benchmark::Logistic => (1.0 - 2.0 * y) * y1 / e,
        _ => rhs(p, s, [y, y1])[1],
    };
    Derivatives { value: y, first: y1, second }
}

fn rk4(p: &ProblemSpec, a: f64, b: f64, u0: [f64; 2], n: usize) -> Vec<[f64; 2]> {
    let h = (b - a) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut u = u0;
    out.push(u);
    let add = |u: [f64; 2], k: [f64; 2], c: f64| [u[0] + c * k[0], u[1] + c * k[1]];
    for i in 0..n {
        let s = a + h * i as f64;
        let k1 = rhs(p, s, u);
        let k2 = rhs(p, s + 0.5 * h, add(u, k1, 0.5 * h));
        let k3 = rhs(p, s + 0.5 * h, add(u, k2, 0.5 * h));
        let k4 = rhs(p, s + h, add(u, k3, h));
        for j in 0..2 {
            u[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push(u);
    }
    out
}

/// Trajectory with `n` steps, shooting on the left slope when needed.
fn trajectory(p: &ProblemSpec, kind: &Kind, a: f64, b: f64, n: usize) -> Result<(Vec<[f64; 2]>, Option<f64>)> {
    match *kind {
        Kind::Initial(u0) => Ok((rk4(p, a, b, u0, n), None)),
        Kind::TwoPoint(left, right) => {
            let miss = |sigma: f64| -> Option<f64> {
                let end = rk4(p, a, b, [left, sigma], n).last().copied()?;
                Some(end[0] - right).filter(|v| v.is_finite())
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            let f_lo = miss(lo).ok_or_else(|| Error::Reference("shooting diverged at zero slope".into()))?;
            let mut f_hi = miss(hi);
            let mut expand = 0;
            while !matches!(f_hi, Some(v) if v * f_lo <= 0.0) {
                expand += 1;
                if expand > 60 {
                    return Err(Error::Reference("could not bracket the initial slope".into()));
                }
                match f_hi {
                    Some(_) => {
                        lo = hi;
                        hi *= 2.0;
                    }
                    None => hi = 0.5 * (lo + hi),
                }
                f_hi = miss(hi);
            }
            let f_lo = miss(lo).unwrap_or(f_lo);
            let sigma = brent_root(&miss, lo, hi, f_lo, f_hi.unwrap())
                .ok_or_else(|| Error::Reference("shooting did not converge".into()))?;
            Ok((rk4(p, a, b, [left, sigma], n), Some(sigma)))
        }
    }
}

/// High-accuracy numeric solution for problems posed on a finite interval.
///
/// Initial-value problems integrate forward from the native initial data.
/// Two-point problems shoot on the left slope; the infinite-range problems
/// of the `stokes_oseen` family are truncated to the diagnostic interval with
/// the far-field value imposed at its right end. The step count doubles until
/// the Richardson estimate of the nodal error is below `tolerance`.
pub fn reference_solution(spec: &ProblemSpec, tolerance: f64) -> Result<Reference> {
    let e = spec.epsilon;
    let (a, b) = spec.domain();
    let kind = match spec.benchmark {
        Benchmark::LinearSingular => Kind::Initial([1.0, -1.0 / e]),
        Benchmark::CarrierTransfer => Kind::Initial([2.0, 0.0]),
        Benchmark::Logistic => Kind::Initial([spec.p0.unwrap_or(2.0), 0.0]),
        Benchmark::BoundaryLayer => Kind::TwoPoint(0.0, 1f64.exp()),
        Benchmark::StokesOseen | Benchmark::StronglySingular => Kind::TwoPoint(0.0, 1.0),
        Benchmark::Kink | Benchmark::Bell | Benchmark::GpVortex => {
            return Err(Error::Reference(format!(
                "{} is posed on an unbounded interval with a singular or asymptotic end condition",
                spec.name()
            )))
        }
    };
    let mut n = MIN_STEPS;
    let (mut coarse, _) = trajectory(spec, &kind, a, b, n)?;
    loop {
        let (fine, sigma) = trajectory(spec, &kind, a, b, 2 * n)?;
        let comps = if second_order(spec.benchmark) { 2 } else { 1 };
        let est = coarse
            .iter()
            .enumerate()
            .map(|(i, u)| (0..comps).fold(0.0f64, |m, j| m.max((u[j] - fine[2 * i][j]).abs())))
            .fold(0.0f64, f64::max)
            / 15.0;
        if est.is_finite() && est < tolerance {
            let h = (b - a) / (2 * n) as f64;
            let nodes: Vec<f64> = (0..=2 * n).map(|i| if i == 2 * n { b } else { a + h * i as f64 }).collect();
            let slopes = nodes
                .iter()
                .zip(&fine)
                .map(|(&s, u)| if comps == 2 { u[1] } else { rhs(spec, s, *u)[0] })
                .collect();
            return Ok(Reference {
                problem: *spec,
                values: fine.iter().map(|u| u[0]).collect(),
                nodes,
                slopes,
                estimated_error: est,
                shooting_slope: sigma,
            });
        }
        n *= 2;
        if n > MAX_STEPS {
            return Err(Error::Reference(format!(
                "step doubling stalled at estimated error {est:e}"
            )));
        }
        coarse = fine;
    }
}

impl Reference {
    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.hermite(s)?.0)
    }

    fn hermite(&self, s: f64) -> Result<(f64, f64)> {
        let n = self.nodes.len() - 1;
        let (a, b) = (self.nodes[0], self.nodes[n]);
        let span = b - a;
        if !(s >= a - 1e-12 * span.abs() && s <= b + 1e-12 * span.abs()) {
            return Err(Error::Reference(format!("{s} outside [{a}, {b}]")));
        }
        let h = span / n as f64;
        let i = (((s - a) / h).floor() as usize).min(n - 1);
        let t = ((s - self.nodes[i]) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h;
        Ok((v, dv))
    }
}

impl Profile for Reference {
    fn eval(&self, s: f64) -> Result<Derivatives> {
        let (y, y1) = self.hermite(s)?;
        Ok(derivatives(&self.problem, s, y, y1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_singular_matches_exponential() {
        for eps in [0.1, 1.0] {
            let p = ProblemSpec::new(Benchmark::LinearSingular, eps).unwrap();
            let r = reference_solution(&p, DEFAULT_REFERENCE_TOL).unwrap();
            for s in p.grid() {
                assert!((r.value(s).unwrap() - (-s / eps).exp()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn carrier_transfer_matches_closed_form() {
        let p = ProblemSpec::new(Benchmark::CarrierTransfer, 0.5).unwrap();
        let r = reference_solution(&p, DEFAULT_REFERENCE_TOL).unwrap();
        for s in p.grid() {
            assert!((r.value(s).unwrap() - p.exact(s).unwrap().value).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_layer_meets_both_ends() {
        let p = ProblemSpec::new(Benchmark::BoundaryLayer, 1.0).unwrap();
        let r = reference_solution(&p, DEFAULT_REFERENCE_TOL).unwrap();
        assert!(r.value(0.0).unwrap().abs() < 1e-14);
        assert!((r.value(1.0).unwrap() - 1f64.exp()).abs() < 1e-10);
        assert!(r.shooting_slope.unwrap() > 0.0);
    }

    #[test]
    fn unbounded_problems_are_refused() {
        let p = ProblemSpec::new(Benchmark::GpVortex, 1.0).unwrap();
        assert!(matches!(reference_solution(&p, 1e-8), Err(Error::Reference(_))));
    }
}
