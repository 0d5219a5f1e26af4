//! Polynomials in the monomial basis and their action on an operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::vector::max_abs;
use crate::operators::SymmetricOperator;

/// Coefficients `c_0 .. c_tau` of `p(s) = sum_i c_i s^i`.
///
/// The stored coefficients may be a normalized copy of some underlying
/// polynomial; `scale` is the factor that was divided out, so the
/// unnormalized polynomial is `scale * p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCoefficients {
    coeffs: Vec<f64>,
    scale: f64,
}

impl PolynomialCoefficients {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self { coeffs, scale: 1.0 }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// Divides by the largest absolute coefficient and records it as `scale`.
    pub fn normalized(coeffs: Vec<f64>) -> Result<Self> {
        let m = max_abs(&coeffs);
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidArgument(format!("cannot normalize coefficients with max |c| = {m}")));
        }
        let coeffs = coeffs.into_iter().map(|c| c / m).collect();
        Ok(Self { coeffs, scale: m })
    }

    /// Coefficients that were already divided by `scale`.
    pub(crate) fn with_scale(coeffs: Vec<f64>, scale: f64) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self { coeffs, scale }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn unnormalized(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c * self.scale).collect()
    }

    /// Horner evaluation of the stored (normalized) polynomial.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// `(c_0 I + c_1 B + ... + c_tau B^tau) v` with exactly `tau` matvecs.
    pub fn apply(&self, op: &SymmetricOperator, v: &[f64]) -> Result<Vec<f64>> {
        op.check_dim(v.len())?;
        let tau = self.degree();
        let mut y: Vec<f64> = v.iter().map(|x| self.coeffs[tau] * x).collect();
        let mut tmp = vec![0.0; v.len()];
        for j in (0..tau).rev() {
            op.apply_into(&y, &mut tmp);
            let c = self.coeffs[j];
            for ((yi, ti), vi) in y.iter_mut().zip(&tmp).zip(v) {
                *yi = ti + c * vi;
            }
        }
        Ok(y)
    }
}

/// Free-function form of [`PolynomialCoefficients::apply`].
pub fn apply_polynomial(p: &PolynomialCoefficients, op: &SymmetricOperator, v: &[f64]) -> Result<Vec<f64>> {
    p.apply(op, v)
}

/// Product of two coefficient vectors.
pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn poly_add_assign(acc: &mut Vec<f64>, other: &[f64], factor: f64) {
    if acc.len() < other.len() {
        acc.resize(other.len(), 0.0);
    }
    for (a, o) in acc.iter_mut().zip(other) {
        *a += factor * o;
    }
}
