//! The symmetric polynomial family `P_tau` and the ratio `xi_tau`.

use crate::error::{Error, Result};
use crate::operators::{elementary_symmetric_with_scale, poly_add_assign, PolynomialCoefficients};

/// Coefficients of `p_tau` from the traces `t_1 .. t_tau` of `B`.
///
/// Runs the recursion
/// `p_k(s) = (1/k) sum_{i=1}^k (-1)^{i-1} p_{k-i}(s) (t_i - s^i)` on traces of
/// `B / t_1`, then rescales, so intermediate values never overflow. The result
/// is normalized to max-abs coefficient 1 and the divisor kept as `scale`.
pub fn sympoly_coefficients(traces: &[f64], tau: usize) -> Result<PolynomialCoefficients> {
    if traces.len() < tau {
        return Err(Error::InvalidArgument(format!(
            "degree {tau} needs {tau} traces, got {}",
            traces.len()
        )));
    }
    if tau == 0 {
        return Ok(PolynomialCoefficients::constant(1.0));
    }
    let c = traces[0];
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("tr(B) must be positive, got {c}")));
    }
    let scaled: Vec<f64> = traces[..tau].iter().enumerate().map(|(i, t)| t / c.powi(i as i32 + 1)).collect();

    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for k in 1..=tau {
        let mut acc = vec![0.0; k + 1];
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            let prev = &p[k - i];
            // prev * (t_i - s^i)
            poly_add_assign(&mut acc, prev, sign * scaled[i - 1]);
            let mut shifted = vec![0.0; i];
            shifted.extend_from_slice(prev);
            poly_add_assign(&mut acc, &shifted, -sign);
        }
        for a in &mut acc {
            *a /= k as f64;
        }
        p.push(acc);
    }
    let hat = p.pop().expect("nonempty");

    // Undo the scaling: coefficient j of the true polynomial is hat_j * c^(tau-j).
    let ln_c = c.ln();
    let logs: Vec<f64> = hat
        .iter()
        .enumerate()
        .map(|(j, h)| if *h == 0.0 { f64::NEG_INFINITY } else { h.abs().ln() + (tau - j) as f64 * ln_c })
        .collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::InvalidArgument("trace recursion produced the zero polynomial".into()));
    }
    let coeffs = hat.iter().zip(&logs).map(|(h, l)| h.signum() * (l - m).exp()).collect();
    Ok(PolynomialCoefficients::with_scale(coeffs, m.exp()))
}

/// `xi_tau = sigma_tau(lambda without the largest) / sigma_tau(lambda without the smallest)`.
pub fn xi_tau(spectrum: &[f64], tau: usize) -> Result<f64> {
    let n = spectrum.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    if tau > n - 1 {
        return Err(Error::DegreeOutOfRange { degree: tau, max: n - 1 });
    }
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let scale = sorted[0].max(f64::MIN_POSITIVE);
    let without_max = elementary_symmetric_with_scale(&sorted[1..], tau, Some(scale))?;
    let without_min = elementary_symmetric_with_scale(&sorted[..n - 1], tau, Some(scale))?;
    Ok(without_max.scaled(tau) / without_min.scaled(tau))
}
