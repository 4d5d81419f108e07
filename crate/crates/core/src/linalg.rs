//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Reciprocal condition number below which a square system counts as singular.
pub(crate) const SINGULAR_RCOND: f64 = 1e-13;

/// Solves a square system, refusing numerically singular matrices.
pub(crate) fn solve_square(m: DMatrix<Complex64>, rhs: DVector<Complex64>) -> Option<DVector<Complex64>> {
    if m.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    if rcond(&m) < SINGULAR_RCOND {
        return None;
    }
    let x = m.lu().solve(&rhs)?;
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

/// Ratio of smallest to largest singular value (0 for an all-zero matrix).
pub(crate) fn rcond(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || !max.is_finite() {
        0.0
    } else {
        min / max
    }
}

/// Minimum-norm least-squares solution of `m x = rhs`.
pub(crate) fn least_squares(m: DMatrix<Complex64>, rhs: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let svd = m.svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let x = svd.solve(rhs, 1e-14 * max).ok()?;
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite()).then_some(x)
}

/// Roots of `c_0 + c_1 z + ... + c_{d-1} z^{d-1} + z^d` (monic, `coeffs` holds `c_0..c_{d-1}`).
///
/// Eigenvalues of the balanced companion matrix, each refined by a few
/// Newton steps on the polynomial itself.
pub(crate) fn monic_roots(coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
    let d = coeffs.len();
    match d {
        0 => return Some(Vec::new()),
        1 => return Some(vec![-coeffs[0]]),
        _ => {}
    }
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for (i, c) in coeffs.iter().enumerate() {
        m[(i, d - 1)] = -c;
    }
    balance(&mut m);
    let eig = m.schur().eigenvalues()?;
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for r in roots.iter_mut() {
        *r = polish_root(coeffs, *r);
    }
    roots
        .iter()
        .all(|r| r.re.is_finite() && r.im.is_finite())
        .then_some(roots)
}

fn eval_monic(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn polish_root(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    let (mut p, _) = eval_monic(coeffs, z);
    for _ in 0..8 {
        let (_, dp) = eval_monic(coeffs, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let (pn, _) = eval_monic(coeffs, next);
        if !(pn.norm() < p.norm()) {
            break;
        }
        z = next;
        p = pn;
    }
    z
}

/// Diagonal similarity scaling so that row and column norms are comparable.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        let mut p = vec![c(1.0, 0.0)];
        for r in roots {
            let mut q = vec![c(0.0, 0.0); p.len() + 1];
            for (i, a) in p.iter().enumerate() {
                q[i + 1] += a;
                q[i] -= a * r;
            }
            p = q;
        }
        p.pop();
        p
    }

    #[test]
    fn recovers_mixed_roots() {
        let roots = [c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(-2.0, 0.0), c(1e-3, 0.0)];
        let mut got = monic_roots(&from_roots(&roots)).unwrap();
        for r in roots {
            let (i, d) = got
                .iter()
                .enumerate()
                .map(|(i, g)| (i, (g - r).norm()))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            assert!(d < 1e-12, "root {r} missed by {d}");
            got.remove(i);
        }
    }

    #[test]
    fn singular_system_is_refused() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert!(solve_square(m, DVector::from_element(2, c(1.0, 0.0))).is_none());
    }

    #[test]
    fn least_squares_matches_exact_solution() {
        let m = DMatrix::from_row_slice(3, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let rhs = DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let x = least_squares(m, &rhs).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14 && (x[1] - c(2.0, 0.0)).norm() < 1e-14);
    }
}
