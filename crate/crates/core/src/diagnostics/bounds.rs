//! Condition-number tables and polynomial approximation bounds.

use serde::Serialize;
use serde_json::json;

use crate::diagnostics::CheckReport;
use crate::error::{Error, Result};
use crate::krylov::{build_gram, krylov_step, model_value, solve_gram};
use crate::operators::vector::{scaled, sub};
use crate::preconditioners::{
    chebyshev_gamma_bound, cond_from_gamma, gamma_of_fn, xi_tau, CuttingPolynomial, Preconditioner, TraceMode,
};
use crate::problems::CompositeObjective;

fn sorted_desc(spectrum: &[f64]) -> Result<Vec<f64>> {
    if spectrum.is_empty() || spectrum.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidArgument("spectrum must be nonempty and positive".into()));
    }
    let mut s = spectrum.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiRow {
    pub tau: usize,
    pub xi: f64,
    /// `(lambda_1 / lambda_n) xi_tau`, the condition number of `P_tau B`.
    pub cond: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct XiTable {
    pub rows: Vec<XiRow>,
    pub report: CheckReport,
}

/// `xi_tau` for `tau = 0..=tau_max`, checking monotone non-increase,
/// `xi_0 = 1` and, when reached, `cond_{n-1} = 1`.
pub fn xi_table(spectrum: &[f64], tau_max: usize) -> Result<XiTable> {
    let s = sorted_desc(spectrum)?;
    let n = s.len();
    if tau_max > n - 1 {
        return Err(Error::DegreeOutOfRange { degree: tau_max, max: n - 1 });
    }
    let ratio = s[0] / s[n - 1];
    let rows = (0..=tau_max)
        .map(|tau| xi_tau(&s, tau).map(|xi| XiRow { tau, xi, cond: ratio * xi }))
        .collect::<Result<Vec<_>>>()?;
    let tol = 1e-12;
    let mut report = CheckReport::new("xi_table", json!({"n": n, "tau_max": tau_max}));
    report.item("xi_0 - 1", (rows[0].xi - 1.0).abs(), tol);
    let worst_rise = rows.windows(2).map(|w| (w[1].xi - w[0].xi) / w[0].xi).fold(f64::NEG_INFINITY, f64::max);
    if rows.len() > 1 {
        report.item("max relative increase", worst_rise, tol);
    }
    if tau_max == n - 1 {
        report.item("cond_{n-1} - 1", (rows[tau_max].cond - 1.0).abs(), 1e-10);
    }
    Ok(XiTable { rows, report })
}

/// `xi_tau (lambda_1 / lambda_n) <= n`: the surrogate for `xi_tau -> 0` once the
/// top `tau` eigenvalues are far above the rest.
pub fn gap_collapse(spectrum: &[f64], tau: usize) -> Result<CheckReport> {
    let s = sorted_desc(spectrum)?;
    let n = s.len();
    let cond = xi_tau(&s, tau)? * s[0] / s[n - 1];
    let mut r = CheckReport::new(
        "xi_gap_collapse",
        json!({"n": n, "tau": tau, "gap": s[0] / s[tau.min(n - 1)]}),
    );
    r.item("xi_tau * lambda_1 / lambda_n", cond, n as f64);
    Ok(r)
}

/// `lambda_{tau+1} / lambda_n` (with `lambda_{n+1} = lambda_n`) and
/// `2 ((sqrt l1 - sqrt ln) / (sqrt l1 + sqrt ln))^{tau+1}`.
pub fn predicted_bounds(spectrum: &[f64], tau: usize) -> Result<(f64, f64)> {
    let s = sorted_desc(spectrum)?;
    let n = s.len();
    if tau > n - 1 {
        return Err(Error::DegreeOutOfRange { degree: tau, max: n - 1 });
    }
    let ln = s[n - 1];
    let top = if tau < n { s[tau] } else { ln };
    Ok((top / ln, chebyshev_gamma_bound(s[0], ln, tau)))
}

/// Measured `gamma` of the cutting and Chebyshev polynomials on `spectrum`
/// against their proven bounds, plus the cond/gamma round trip for cutting.
pub fn verify_polynomial_bounds(spectrum: &[f64], tau: usize, tol: f64) -> Result<CheckReport> {
    let s = sorted_desc(spectrum)?;
    let n = s.len();
    let (cut_cond, cheb_bound) = predicted_bounds(&s, tau)?;
    let mut r = CheckReport::new("polynomial_bounds", json!({"n": n, "tau": tau, "tol": tol}));
    let cut = CuttingPolynomial::for_spectrum(&s, tau)?;
    let g_cut = gamma_of_fn(|x| cut.eval(x), s.iter().copied());
    let cut_bound = (cut_cond - 1.0) / (cut_cond + 1.0);
    r.item("cutting gamma", g_cut, cut_bound + tol);
    // gamma implied by the predicted condition number, inverted through cond_from_gamma.
    r.item("cond_from_gamma round trip", (cond_from_gamma(cut_bound)? - cut_cond).abs(), 1e-12 * cut_cond);
    r.item("cutting gamma vs implied gamma", g_cut - cut_bound, 1e-12);
    let cheb = Preconditioner::chebyshev_on(s[0], s[n - 1], tau)?;
    let g_cheb = gamma_of_fn(|x| cheb.eval(x), s.iter().copied());
    r.item("chebyshev gamma", g_cheb, cheb_bound + tol);
    Ok(r)
}

/// Model decrease of the Krylov step at `x` against the `P_tau` and Chebyshev
/// steps of the same degree, each taken with its own `M = beta L`.
pub fn krylov_dominance(obj: &CompositeObjective, x: &[f64], tau: usize) -> Result<CheckReport> {
    let sys = build_gram(obj, x, tau)?;
    let info = solve_gram(&sys);
    let g = sys.gradient().to_vec();
    let h_k = sub(&krylov_step(x, &info, &sys), x);
    let m_k = model_value(obj, &g, &h_k)?;
    let op = obj.curvature();
    let l = obj.lipschitz();
    let mut r = CheckReport::new("krylov_dominance", json!({"n": x.len(), "tau": tau}));
    let scale = m_k.abs().max(f64::MIN_POSITIVE);
    let others = [
        ("sympoly", Preconditioner::sympoly(op, tau, TraceMode::Exact)?),
        ("chebyshev", Preconditioner::chebyshev(op, tau)?),
    ];
    for (name, prec) in others {
        let beta = prec.quality(op)?.beta;
        let h = scaled(-1.0 / (beta * l), &prec.apply(op, &g)?);
        let m_p = model_value(obj, &g, &h)?;
        r.item(format!("krylov model - {name} model"), m_k - m_p, 1e-10 * scale);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_examples() {
        let t = xi_table(&[3.0, 2.0, 1.0], 2).unwrap();
        let want = [(1.0, 3.0), (0.6, 1.8), (1.0 / 3.0, 1.0)];
        for (row, (xi, cond)) in t.rows.iter().zip(want) {
            assert!((row.xi - xi).abs() < 1e-15 && (row.cond - cond).abs() < 1e-14);
        }
        assert!(t.report.pass);
        let flat = xi_table(&[1.0, 1.0, 1.0], 2).unwrap();
        assert!(flat.rows.iter().all(|r| r.xi == 1.0 && r.cond == 1.0));
        let x = xi_table(&[100.0, 1.0, 1.0], 1).unwrap();
        assert!((x.rows[1].xi - 2.0 / 101.0).abs() < 1e-15);
        assert!(matches!(xi_table(&[2.0, 1.0], 2), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn predicted_bounds_examples() {
        assert_eq!(predicted_bounds(&[10.0, 2.0, 1.0], 1).unwrap().0, 2.0);
        assert_eq!(predicted_bounds(&[10.0, 2.0, 1.0], 2).unwrap().0, 1.0);
        assert_eq!(predicted_bounds(&[5.0, 5.0], 1).unwrap().1, 0.0);
    }

    #[test]
    fn bounds_hold_on_small_spectrum() {
        let s = [40.0, 17.0, 9.0, 3.0, 2.5, 1.0];
        for tau in 0..6 {
            assert!(verify_polynomial_bounds(&s, tau, 1e-10).unwrap().pass, "tau {tau}");
        }
    }

    #[test]
    fn gap_collapse_at_large_gap() {
        assert!(gap_collapse(&[1e3, 1e3, 1.0, 1.0, 1.0], 2).unwrap().pass);
        assert!(!gap_collapse(&[1e3, 1.0, 1.0, 1.0], 0).unwrap().pass);
    }
}
