//! Rate envelopes of the fixed-step methods, checked against telemetry.

use serde::Serialize;
use serde_json::json;

use crate::diagnostics::CheckReport;
use crate::solvers::RunResult;

/// Exact constants of one run: the preconditioner quality `(alpha, beta)`,
/// smoothness `L`, strong convexity `mu`, `R^2 = ||x_0 - x*||_B^2` and `F*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeParams {
    pub alpha: f64,
    pub beta: f64,
    pub l: f64,
    pub mu: f64,
    pub r_sq: f64,
    pub f_star: f64,
}

impl EnvelopeParams {
    pub fn kappa(&self) -> f64 {
        self.beta / self.alpha
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeCheck {
    pub envelope: String,
    pub iterations: Vec<usize>,
    pub bound: Vec<f64>,
    pub observed: Vec<f64>,
    pub pass: Vec<bool>,
    pub max_ratio: f64,
    pub min_slack: f64,
    pub violations: usize,
    /// Adaptive runs do not meet the fixed-step preconditions.
    pub advisory: bool,
}

impl EnvelopeCheck {
    fn build(envelope: &str, advisory: bool, rows: Vec<(usize, f64, f64)>, allowance: f64) -> Self {
        let mut c = EnvelopeCheck {
            envelope: envelope.to_string(),
            iterations: vec![],
            bound: vec![],
            observed: vec![],
            pass: vec![],
            max_ratio: 0.0,
            min_slack: f64::INFINITY,
            violations: 0,
            advisory,
        };
        for (k, bound, obs) in rows {
            let ok = obs <= bound + allowance;
            c.violations += usize::from(!ok);
            if bound > 0.0 {
                c.max_ratio = c.max_ratio.max(obs / bound);
            }
            c.min_slack = c.min_slack.min(bound - obs);
            c.iterations.push(k);
            c.bound.push(bound);
            c.observed.push(obs);
            c.pass.push(ok);
        }
        c
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn to_report(&self) -> CheckReport {
        let mut r = CheckReport::new(
            self.envelope.clone(),
            json!({"iterations": self.iterations.len(), "max_ratio": self.max_ratio}),
        );
        if self.advisory {
            r = r.advisory();
        }
        for i in 0..self.iterations.len() {
            if !self.pass[i] || i + 1 == self.iterations.len() {
                r.item(format!("k = {}", self.iterations[i]), self.observed[i], self.bound[i]);
            }
        }
        if self.iterations.is_empty() {
            r.item("no iterations", 0.0, 0.0);
        }
        r
    }
}

/// Rounding allowance on gaps: a few ulps of the function scale.
fn allowance(run: &RunResult, p: &EnvelopeParams) -> f64 {
    let f0 = run.records.first().map_or(0.0, |r| r.fval.abs());
    16.0 * f64::EPSILON * (f0 + p.f_star.abs())
}

fn gaps<'a>(run: &'a RunResult, p: &EnvelopeParams) -> impl Iterator<Item = (usize, f64)> + 'a {
    let f_star = p.f_star;
    run.records.iter().filter(|r| r.k >= 1).map(move |r| (r.k, r.fval - f_star))
}

fn is_advisory(run: &RunResult) -> bool {
    run.method.starts_with("adaptive")
}

/// `F(x_k) - F* <= (beta/alpha) L R^2 / k` and, for `mu > 0`,
/// `<= (1 - alpha mu / (4 beta L))^k (F(x_0) - F*)`.
pub fn gm_envelopes(run: &RunResult, p: &EnvelopeParams) -> Vec<EnvelopeCheck> {
    let tol = allowance(run, p);
    let adv = is_advisory(run);
    let c = p.kappa() * p.l * p.r_sq;
    let mut out = vec![EnvelopeCheck::build(
        "gm_convex",
        adv,
        gaps(run, p).map(|(k, g)| (k, c / k as f64, g)).collect(),
        tol,
    )];
    if p.mu > 0.0 {
        let g0 = run.records.first().map_or(0.0, |r| r.fval - p.f_star);
        let q = 1.0 - 0.25 * p.mu / (p.kappa() * p.l);
        out.push(EnvelopeCheck::build(
            "gm_linear",
            adv,
            gaps(run, p).map(|(k, g)| (k, q.powi(k as i32) * g0, g)).collect(),
            tol,
        ));
    }
    out
}

/// `F(x_k) - F* <= 2 (beta/alpha) L R^2 / k^2`, the linear bound for `mu > 0`,
/// and the growth of the estimating-sequence weights
/// `A_k >= k^2 / (4M)` and `A_k >= 1 / (M (1 - q)^{k-1})` with `q = sqrt(rho / M)`.
pub fn fgm_envelopes(run: &RunResult, p: &EnvelopeParams, rho: f64) -> Vec<EnvelopeCheck> {
    let tol = allowance(run, p);
    let adv = is_advisory(run);
    let kappa = p.kappa();
    let c = 2.0 * kappa * p.l * p.r_sq;
    let mut out = vec![EnvelopeCheck::build(
        "fgm_convex",
        adv,
        gaps(run, p).map(|(k, g)| (k, c / (k * k) as f64, g)).collect(),
        tol,
    )];
    if p.mu > 0.0 {
        let q = 1.0 - (p.mu / (kappa * p.l)).sqrt();
        let c = kappa * 0.5 * p.l * p.r_sq;
        out.push(EnvelopeCheck::build(
            "fgm_linear",
            adv,
            gaps(run, p).map(|(k, g)| (k, q.powi(k as i32 - 1) * c, g)).collect(),
            tol,
        ));
    }
    // Weight bounds, written as `lower - A_k <= 0`, so `observed` is the lower bound.
    let weights: Vec<(usize, f64, f64)> = run
        .records
        .iter()
        .filter(|r| r.k >= 1)
        .filter_map(|r| r.a_k.map(|a| (r.k, a, r.m_k)))
        .collect();
    let rel = 1e-12;
    out.push(EnvelopeCheck::build(
        "fgm_weights_sublinear",
        adv,
        weights.iter().map(|&(k, a, m)| (k, a * (1.0 + rel), (k * k) as f64 / (4.0 * m))).collect(),
        0.0,
    ));
    if rho > 0.0 {
        out.push(EnvelopeCheck::build(
            "fgm_weights_linear",
            adv,
            weights
                .iter()
                .map(|&(k, a, m)| {
                    let q = (rho / m).sqrt();
                    (k, a * (1.0 + rel), 1.0 / (m * (1.0 - q).powi(k as i32 - 1)))
                })
                .collect(),
            0.0,
        ));
    }
    out
}

/// `| M a_k^2 / A_k - (1 + rho A_k) | / (1 + rho A_k)` at every iteration,
/// from the recorded weights `A_k` and step constants `M_k`.
pub fn coefficient_identity(run: &RunResult, rho: f64, tol: f64) -> CheckReport {
    let mut r = CheckReport::new("fgm_coefficient_identity", json!({"rho": rho, "tol": tol}));
    let mut worst = (0usize, 0.0f64);
    let mut prev = 0.0;
    for rec in &run.records {
        let Some(a_big) = rec.a_k else { continue };
        if rec.k >= 1 {
            let a = a_big - prev;
            let rhs = 1.0 + rho * a_big;
            let dev = (rec.m_k * a * a / a_big - rhs).abs() / rhs;
            if !(dev <= worst.1) {
                worst = (rec.k, dev);
            }
        }
        prev = a_big;
    }
    r.item(format!("worst at k = {}", worst.0), worst.1, tol);
    r
}
