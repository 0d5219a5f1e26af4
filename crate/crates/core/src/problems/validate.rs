//! Finite-difference checks of the gradient and of `mu B <= Hess f <= L B`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::random::{gaussian_vector, rng_from_seed};
use crate::operators::vector::{dot, norm};
use crate::problems::CompositeObjective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Gradient,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundViolation {
    pub kind: ViolationKind,
    pub trial: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub measured: f64,
    pub allowed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub trials: usize,
    pub max_gradient_rel_err: f64,
    /// Largest curvature overshoot relative to `L <Bv, v>`; nonpositive means within bounds.
    pub max_curvature_slack: f64,
    pub violations: Vec<BoundViolation>,
    pub pass: bool,
}

pub const GRADIENT_TOL: f64 = 1e-5;
pub const CURVATURE_TOL: f64 = 1e-4;

/// Probes `trials` random points `x` and unit directions `v`.
///
/// The Hessian-vector product is the central difference of gradients with
/// step `1e-5 (1 + ||x||)`, compared against `mu <Bv, v>` and `L <Bv, v>`
/// with tolerance `1e-4 L <Bv, v>`; the gradient is compared with the
/// central difference of `f` along `v`.
pub fn validate_bounds(obj: &CompositeObjective, trials: usize, seed: u64) -> Result<ValidationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("validation needs at least one trial".into()));
    }
    let n = obj.dim();
    let (l, mu) = (obj.lipschitz(), obj.strong_convexity());
    let mut rng = rng_from_seed(seed);
    let mut report =
        ValidationReport { trials, max_gradient_rel_err: 0.0, max_curvature_slack: f64::NEG_INFINITY, violations: vec![], pass: true };
    for trial in 0..trials {
        let x: Vec<f64> = gaussian_vector(&mut rng, n).iter().map(|z| z / (n as f64).sqrt()).collect();
        let mut v = gaussian_vector(&mut rng, n);
        let r = norm(&v);
        v.iter_mut().for_each(|z| *z /= r);

        let (fx, g) = obj.value_and_gradient(&x);
        let shifted = |t: f64| -> Vec<f64> { x.iter().zip(&v).map(|(a, b)| a + t * b).collect() };

        let eps_g = 1e-6 * (1.0 + norm(&x));
        let fd = (obj.value(&shifted(eps_g)) - obj.value(&shifted(-eps_g))) / (2.0 * eps_g);
        let exact = dot(&g, &v);
        let denom = (norm(&g) * norm(&v)).max(1e-8 * (1.0 + fx.abs()));
        let rel = (fd - exact).abs() / denom;
        report.max_gradient_rel_err = report.max_gradient_rel_err.max(rel);
        if rel > GRADIENT_TOL {
            report.violations.push(BoundViolation {
                kind: ViolationKind::Gradient,
                trial,
                x: x.clone(),
                v: v.clone(),
                measured: rel,
                allowed: GRADIENT_TOL,
            });
        }

        let eps = 1e-5 * (1.0 + norm(&x));
        let gp = obj.gradient(&shifted(eps));
        let gm = obj.gradient(&shifted(-eps));
        let hv: f64 = gp.iter().zip(&gm).zip(&v).map(|((a, b), vi)| (a - b) / (2.0 * eps) * vi).sum();
        let bvv = obj.curvature().b_norm_sq(&v)?;
        let upper = l * bvv;
        let lower = mu * bvv;
        let tol = CURVATURE_TOL * upper;
        let scale = upper.max(f64::MIN_POSITIVE);
        report.max_curvature_slack = report.max_curvature_slack.max((hv - upper) / scale).max((lower - hv) / scale);
        if hv > upper + tol {
            report.violations.push(BoundViolation {
                kind: ViolationKind::Upper,
                trial,
                x: x.clone(),
                v: v.clone(),
                measured: hv,
                allowed: upper + tol,
            });
        }
        if hv < lower - tol {
            report.violations.push(BoundViolation {
                kind: ViolationKind::Lower,
                trial,
                x,
                v,
                measured: hv,
                allowed: lower - tol,
            });
        }
    }
    report.pass = report.violations.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SymmetricOperator;
    use crate::problems::{make_quadratic, make_regression, Loss, RegressionData, RegressionOptions, SparseRows};

    fn rows() -> SparseRows {
        SparseRows::new(
            3,
            &[
                vec![(0, 1.0), (1, 0.4)],
                vec![(1, -0.8), (2, 0.3)],
                vec![(0, 0.2), (2, 1.5)],
                vec![(0, -0.6), (1, 0.1), (2, 0.7)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn quadratic_is_tight() {
        let obj = make_quadratic(SymmetricOperator::diagonal(&[3.0, 2.0, 1.0]), vec![1.0, 0.0, -1.0]).unwrap();
        let r = validate_bounds(&obj, 20, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.max_curvature_slack.abs() < 1e-6);
    }

    #[test]
    fn huber_and_logistic_pass() {
        let huber = RegressionData::new(rows(), vec![0.1, -0.2, 0.05, 0.0], Loss::Huber { mu: 0.1 }).unwrap();
        let obj = make_regression(huber, RegressionOptions::default()).unwrap();
        assert!(validate_bounds(&obj, 30, 2).unwrap().pass);
        let logit = RegressionData::logistic_from_labels(rows(), &[1.0, -1.0, -1.0, 1.0]).unwrap();
        let obj = make_regression(logit, RegressionOptions::default()).unwrap();
        assert!(validate_bounds(&obj, 30, 3).unwrap().pass);
    }

    #[test]
    fn wrong_constant_is_caught() {
        let huber = RegressionData::new(rows(), vec![0.0; 4], Loss::Huber { mu: 10.0 }).unwrap();
        let obj = make_regression(huber, RegressionOptions::default()).unwrap();
        // Claim a quadratic with L = 1 but curvature 10 B.
        let b = obj.curvature_dense().scale(0.1);
        let q = make_quadratic(SymmetricOperator::dense(b).unwrap(), vec![0.0; 3]).unwrap();
        let fake = CompositeObjective { curvature: q.curvature_arc(), ..obj.clone() };
        let r = validate_bounds(&fake, 10, 4).unwrap();
        assert!(!r.pass);
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Upper));
    }

    #[test]
    fn zero_trials_rejected() {
        let obj = make_quadratic(SymmetricOperator::identity(2), vec![0.0; 2]).unwrap();
        assert!(validate_bounds(&obj, 0, 0).is_err());
    }
}
