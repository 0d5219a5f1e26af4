//! Chebyshev polynomials shifted to a spectral interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{poly_add_assign, PolynomialCoefficients, SymmetricOperator};

/// `T_k(x)` by the three-term recurrence.
pub fn chebyshev_t(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for _ in 1..k {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Smallest degree whose Chebyshev bound reaches `gamma <= eps / 2`,
/// `floor(sqrt(l_max / l_min) * ln(8 / eps))`.
pub fn chebyshev_degree(lambda_max: f64, lambda_min: f64, eps: f64) -> usize {
    ((lambda_max / lambda_min).sqrt() * (8.0 / eps).ln()).floor() as usize
}

/// `2 ((sqrt(l1) - sqrt(ln)) / (sqrt(l1) + sqrt(ln)))^(tau+1)`.
pub fn chebyshev_gamma_bound(lambda_max: f64, lambda_min: f64, tau: usize) -> f64 {
    let (a, b) = (lambda_max.sqrt(), lambda_min.sqrt());
    2.0 * ((a - b) / (a + b)).powi(tau as i32 + 1)
}

/// `p(s) = (1 - Q(s)) / s` with `Q(s) = T_{tau+1}(x(s)) / T_{tau+1}(x0)`,
/// `x(s) = (l_max + l_min - 2 s) / (l_max - l_min)`.
///
/// Evaluated through the recurrence
/// `r_{k+1} = 2 x0 r_k + 2 d t_k - r_{k-1}` for `r_k = (T_k(x0) - T_k(x(s))) / s`,
/// which never forms monomial coefficients and is stable for any degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPolynomial {
    lambda_max: f64,
    lambda_min: f64,
    tau: usize,
}

impl ChebyshevPolynomial {
    pub fn new(lambda_max: f64, lambda_min: f64, tau: usize) -> Result<Self> {
        if !(lambda_min > 0.0) || !(lambda_max >= lambda_min) || !lambda_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need lambda_max >= lambda_min > 0, got {lambda_max} and {lambda_min}"
            )));
        }
        if lambda_max == lambda_min {
            return Err(Error::InvalidArgument("degenerate interval: use the constant 1/lambda".into()));
        }
        Ok(Self { lambda_max, lambda_min, tau })
    }

    pub fn degree(&self) -> usize {
        self.tau
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lambda_min, self.lambda_max)
    }

    fn x0_d(&self) -> (f64, f64) {
        let w = self.lambda_max - self.lambda_min;
        ((self.lambda_max + self.lambda_min) / w, 2.0 / w)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let (x0, d) = self.x0_d();
        let (mut t_prev, mut t) = (1.0, x0 - d * s);
        let (mut r_prev, mut r) = (0.0, d);
        for _ in 1..=self.tau {
            let r_next = 2.0 * x0 * r + 2.0 * d * t - r_prev;
            let t_next = 2.0 * (x0 - d * s) * t - t_prev;
            (r_prev, r) = (r, r_next);
            (t_prev, t) = (t, t_next);
        }
        r / chebyshev_t(self.tau + 1, x0)
    }

    /// `p(B) v` using exactly `tau` matvecs.
    pub fn apply(&self, op: &SymmetricOperator, v: &[f64]) -> Result<Vec<f64>> {
        op.check_dim(v.len())?;
        let n = v.len();
        let (x0, d) = self.x0_d();
        let mut t_prev = v.to_vec();
        let mut r_prev = vec![0.0; n];
        let mut r: Vec<f64> = v.iter().map(|x| d * x).collect();
        let mut bt = vec![0.0; n];
        if self.tau > 0 {
            op.apply_into(&t_prev, &mut bt);
        }
        let mut t: Vec<f64> = v.iter().zip(&bt).map(|(x, b)| x0 * x - d * b).collect();
        for k in 1..=self.tau {
            for i in 0..n {
                let r_next = 2.0 * x0 * r[i] + 2.0 * d * t[i] - r_prev[i];
                r_prev[i] = r[i];
                r[i] = r_next;
            }
            if k < self.tau {
                op.apply_into(&t, &mut bt);
                for i in 0..n {
                    let t_next = 2.0 * (x0 * t[i] - d * bt[i]) - t_prev[i];
                    t_prev[i] = t[i];
                    t[i] = t_next;
                }
            }
        }
        let denom = chebyshev_t(self.tau + 1, x0);
        Ok(r.into_iter().map(|x| x / denom).collect())
    }

    /// Monomial coefficients. Refused once cancellation in the monomial basis
    /// would lose more than about eight digits on the interval.
    pub fn coefficients(&self) -> Result<PolynomialCoefficients> {
        let (x0, d) = self.x0_d();
        let mut t_prev = vec![1.0];
        let mut t = vec![x0, -d];
        let mut r_prev: Vec<f64> = vec![0.0];
        let mut r = vec![d];
        for _ in 1..=self.tau {
            let mut r_next = vec![0.0; r.len() + 1];
            poly_add_assign(&mut r_next, &r, 2.0 * x0);
            poly_add_assign(&mut r_next, &t, 2.0 * d);
            poly_add_assign(&mut r_next, &r_prev, -1.0);
            let mut t_next = vec![0.0; t.len() + 1];
            poly_add_assign(&mut t_next, &t, 2.0 * x0);
            for (j, c) in t.iter().enumerate() {
                t_next[j + 1] -= 2.0 * d * c;
            }
            poly_add_assign(&mut t_next, &t_prev, -1.0);
            (r_prev, r) = (r, r_next);
            (t_prev, t) = (t, t_next);
        }
        r.truncate(self.tau + 1);
        let denom = chebyshev_t(self.tau + 1, x0);
        let coeffs: Vec<f64> = r.iter().map(|c| c / denom).collect();
        let magnitude: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.abs() * self.lambda_max.powi(j as i32 + 1))
            .sum();
        if !(magnitude < 1e8) {
            return Err(Error::IllConditioned(format!(
                "degree {} on [{}, {}]: monomial terms reach {magnitude:.1e}",
                self.tau, self.lambda_min, self.lambda_max
            )));
        }
        Ok(PolynomialCoefficients::new(coeffs))
    }
}

/// Monomial coefficients of the Chebyshev polynomial of degree `tau`.
pub fn chebyshev_polynomial(lambda_max: f64, lambda_min: f64, tau: usize) -> Result<PolynomialCoefficients> {
    ChebyshevPolynomial::new(lambda_max, lambda_min, tau)?.coefficients()
}
