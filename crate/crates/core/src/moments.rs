//! Log-derivative moments of a normalized series.
//!
//! For `s(x) = Π (1 + A_i x)^{n_i}` the coefficients of `ln s` are
//! `ℓ_m = Σ n_i (-1)^{m-1} A_i^m / m`, so `B_m = (-1)^{m-1} m ℓ_m` recovers the
//! power sums `Σ n_i A_i^m`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

/// Power sums `B_j` for consecutive indices starting at `first_index`.
///
/// Moments extracted from a series start at index 1. A large-variable
/// exponent condition contributes the zeroth moment `B_0 = Σ n_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    first_index: usize,
    values: Vec<Complex64>,
}

impl MomentVector {
    /// Moments `B_1..B_k`.
    pub fn new(values: Vec<Complex64>) -> Self {
        Self {
            first_index: 1,
            values,
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Prepends `B_0`. Only valid on a vector that starts at index 1.
    pub fn with_zeroth(&self, b0: Complex64) -> Self {
        assert_eq!(self.first_index, 1, "zeroth moment already present");
        let mut values = Vec::with_capacity(self.values.len() + 1);
        values.push(b0);
        values.extend_from_slice(&self.values);
        Self {
            first_index: 0,
            values,
        }
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Number of stored moments.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest index `k` present (the order for vectors starting at 1).
    pub fn order(&self) -> usize {
        (self.first_index + self.values.len()).saturating_sub(1)
    }

    /// `B_j`, if stored.
    pub fn get(&self, j: usize) -> Option<Complex64> {
        j.checked_sub(self.first_index)
            .and_then(|i| self.values.get(i).copied())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.values
            .iter()
            .all(|b| b.im.abs() <= tol * b.norm().max(1.0))
    }
}

/// `B_n = (-1)^{n-1} n ℓ_n` for `n = 1..K`, with `ℓ_n` the coefficients of `ln s`.
pub fn moments_from_series(s: &TruncatedSeries) -> Result<MomentVector> {
    let a0 = s.coeff(0);
    if (a0 - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::NotNormalized(a0));
    }
    let l = s.log()?;
    let values = (1..=s.order())
        .map(|n| {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            l.coeff(n) * (sign * n as f64)
        })
        .collect();
    Ok(MomentVector::new(values))
}
