//! Polynomials that annihilate the top of the spectrum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{poly_mul, PolynomialCoefficients, SymmetricOperator};

/// `p(s) = (1 + q(s) (a s - 1)) / s` with `q(s) = prod_{i<=tau} (1 - s / lambda_i)`
/// and `a = 2 / (lambda_{tau+1} + lambda_n)`.
///
/// `lambda_top` holds `lambda_1 .. lambda_{tau+1}` in descending order.
pub fn cutting_polynomial(lambda_top: &[f64], lambda_n: f64, tau: usize) -> Result<PolynomialCoefficients> {
    if lambda_top.len() < tau + 1 {
        return Err(Error::InvalidArgument(format!(
            "degree {tau} needs {} leading eigenvalues, got {}",
            tau + 1,
            lambda_top.len()
        )));
    }
    let top = &lambda_top[..=tau];
    if !(lambda_n > 0.0) || top.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument("cutting polynomial needs positive eigenvalues".into()));
    }
    if top.windows(2).any(|w| w[0] < w[1]) || top[tau] < lambda_n {
        return Err(Error::InvalidArgument("eigenvalues must be sorted descending and above lambda_n".into()));
    }
    let a = 2.0 / (top[tau] + lambda_n);
    let mut q = vec![1.0];
    for l in &top[..tau] {
        q = poly_mul(&q, &[1.0, -1.0 / l]);
    }
    let mut numer = poly_mul(&q, &[-1.0, a]);
    numer[0] += 1.0;
    debug_assert!(numer[0].abs() < 1e-12);
    Ok(PolynomialCoefficients::new(numer[1..].to_vec()))
}

/// Cutting polynomial of degree `tau` for a full spectrum (any order).
pub fn cutting_for_spectrum(spectrum: &[f64], tau: usize) -> Result<PolynomialCoefficients> {
    let n = spectrum.len();
    if n == 0 || tau > n - 1 {
        return Err(Error::DegreeOutOfRange { degree: tau, max: n.saturating_sub(1) });
    }
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    cutting_polynomial(&sorted[..=tau], sorted[n - 1], tau)
}

/// The cutting polynomial in product form `p(s) = (1 - prod_j (1 - s / mu_j)) / s`
/// with nodes `mu = (lambda_1, .., lambda_tau, 1 / a)`.
///
/// Evaluated by `r_k = r_{k-1} + q_{k-1} / mu_k`, `q_k = q_{k-1} - s q_{k-1} / mu_k`,
/// which stays accurate where the monomial expansion cancels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuttingPolynomial {
    nodes: Vec<f64>,
}

impl CuttingPolynomial {
    pub fn new(lambda_top: &[f64], lambda_n: f64, tau: usize) -> Result<Self> {
        // Same validation as the monomial form.
        cutting_polynomial(lambda_top, lambda_n, tau)?;
        let mut nodes = lambda_top[..tau].to_vec();
        nodes.push(0.5 * (lambda_top[tau] + lambda_n));
        Ok(Self { nodes })
    }

    pub fn for_spectrum(spectrum: &[f64], tau: usize) -> Result<Self> {
        let n = spectrum.len();
        if n == 0 || tau > n - 1 {
            return Err(Error::DegreeOutOfRange { degree: tau, max: n.saturating_sub(1) });
        }
        let mut sorted = spectrum.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        Self::new(&sorted[..=tau], sorted[n - 1], tau)
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eval(&self, s: f64) -> f64 {
        let (mut r, mut q) = (0.0, 1.0);
        for mu in &self.nodes {
            r += q / mu;
            // exact zero at a node, so later nodes cannot amplify leftover rounding
            q *= 1.0 - s / mu;
        }
        r
    }

    /// `p(B) v` with `tau` matvecs.
    pub fn apply(&self, op: &SymmetricOperator, v: &[f64]) -> Result<Vec<f64>> {
        op.check_dim(v.len())?;
        let mut r = vec![0.0; v.len()];
        let mut q = v.to_vec();
        let mut bq = vec![0.0; v.len()];
        let last = self.nodes.len() - 1;
        for (k, mu) in self.nodes.iter().enumerate() {
            r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri += qi / mu);
            if k < last {
                op.apply_into(&q, &mut bq);
                q.iter_mut().zip(&bq).for_each(|(qi, bi)| *qi -= bi / mu);
            }
        }
        Ok(r)
    }

    pub fn coefficients(&self) -> PolynomialCoefficients {
        let mut q = vec![1.0];
        for mu in &self.nodes {
            q = poly_mul(&q, &[1.0, -1.0 / mu]);
        }
        PolynomialCoefficients::new(q[1..].iter().map(|c| -c).collect())
    }
}

/// `(lambda_{tau+1} - lambda_n) / (lambda_{tau+1} + lambda_n)`.
pub fn cutting_gamma_bound(spectrum: &[f64], tau: usize) -> f64 {
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let ln = sorted[sorted.len() - 1];
    let l = sorted.get(tau).copied().unwrap_or(ln);
    (l - ln) / (l + ln)
}
