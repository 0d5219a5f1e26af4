//! Gradient method, fixed and adaptive, and the line-search ingredients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::vector::dot;
use crate::preconditioners::Preconditioner;
use crate::problems::{metric_step, step_along, CompositeObjective, CompositePart, MetricStep};
use crate::solvers::{check_start, Sample, SolverConfig, Telemetry, Termination};

/// Rounding allowance of the predicate, in units of `|f|`.
const PREDICATE_SLACK: f64 = 64.0 * f64::EPSILON;

/// `f(y) <= f(x) + <g, y - x> + (M/2) ||y - x||^2_{P^-1}`,
/// with the `P^{-1}` term supplied by the step that produced `y`.
///
/// A few dozen ulps of `max(|f(x)|, |f(y)|, scale)` are allowed so that rounding
/// alone cannot reject a step. Runs pass `scale = |F(x0)|`: near the minimum the
/// rounding error of `f` is set by the data, not by the current value.
#[allow(clippy::too_many_arguments)]
pub fn quadratic_growth_predicate(
    m: f64,
    f_x: f64,
    g_x: &[f64],
    x: &[f64],
    y: &[f64],
    dist_sq_pinv: f64,
    f_y: f64,
    scale: f64,
) -> bool {
    let lin: f64 = g_x.iter().zip(y.iter().zip(x)).map(|(g, (a, b))| g * (a - b)).sum();
    let rhs = f_x + lin + 0.5 * m * dist_sq_pinv;
    f_y <= rhs + PREDICATE_SLACK * f_x.abs().max(f_y.abs()).max(scale)
}

/// Fixed-step preconditioned gradient method.
pub fn run_gm(obj: &CompositeObjective, prec: &Preconditioner, config: &SolverConfig, x0: &[f64]) -> Result<crate::solvers::RunResult> {
    check_start(obj, x0)?;
    let m = config.m;
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("M must be positive, got {m}")));
    }
    let op = obj.curvature();
    let psi = obj.psi();
    let mut t = Telemetry::new(obj, config.stop);
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    t.f_evals += 1;
    t.grad_evals += 1;
    let sample = |f: f64, x: &[f64], grad_map: f64| Sample {
        fval: f + psi.value(x),
        grad_map,
        ls_trials: 0,
        m_k: m,
        a_k: None,
        eff_degree: None,
    };
    let mut end = t.record(0, sample(f, &x, f64::NAN))?;
    for k in 1..=config.max_iters {
        if end.is_some() {
            break;
        }
        let step = metric_step(m, prec, op, &x, &g, psi)?;
        t.matvecs += step.matvecs;
        x = step.y;
        (f, g) = obj.value_and_gradient(&x);
        t.f_evals += 1;
        t.grad_evals += 1;
        end = t.record(k, Sample { ls_trials: 1, ..sample(f, &x, m * step.dist_sq_pinv.sqrt()) })?;
    }
    Ok(t.finish("gm", prec, x, end.unwrap_or(Termination::MaxIters), vec![]))
}

/// Step direction reused across line-search trials when `psi = 0`.
struct CachedDirection {
    d: Vec<f64>,
}

fn trial_step(
    cached: &mut Option<CachedDirection>,
    m: f64,
    prec: &Preconditioner,
    obj: &CompositeObjective,
    x: &[f64],
    g: &[f64],
) -> Result<MetricStep> {
    match obj.psi() {
        CompositePart::Zero => {
            let fresh = cached.is_none();
            if fresh {
                *cached = Some(CachedDirection { d: prec.apply(obj.curvature(), g)? });
            }
            let d = &cached.as_ref().expect("cached").d;
            Ok(step_along(m, x, g, d, if fresh { prec.matvecs_per_apply() } else { 0 }))
        }
        psi => metric_step(m, prec, obj.curvature(), x, g, psi),
    }
}

/// Gradient method with doubling/halving search on `M`.
pub fn run_adaptive_gm(
    obj: &CompositeObjective,
    prec: &Preconditioner,
    config: &SolverConfig,
    x0: &[f64],
) -> Result<crate::solvers::RunResult> {
    check_start(obj, x0)?;
    if !(config.m > 0.0) {
        return Err(Error::InvalidArgument(format!("initial M must be positive, got {}", config.m)));
    }
    let psi = obj.psi();
    let mut t = Telemetry::new(obj, config.stop);
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    t.f_evals += 1;
    t.grad_evals += 1;
    let scale = f.abs();
    let mut m_next = config.m;
    let mut end = t.record(
        0,
        Sample { fval: f + psi.value(&x), grad_map: f64::NAN, ls_trials: 0, m_k: m_next, a_k: None, eff_degree: None },
    )?;
    for k in 1..=config.max_iters {
        if end.is_some() {
            break;
        }
        let mut cached = None;
        let mut m = m_next;
        let mut trials = 0u32;
        let (step, f_y) = loop {
            trials += 1;
            let step = trial_step(&mut cached, m, prec, obj, &x, &g)?;
            t.matvecs += step.matvecs;
            let f_y = obj.value(&step.y);
            t.f_evals += 1;
            if quadratic_growth_predicate(m, f, &g, &x, &step.y, step.dist_sq_pinv, f_y, scale) {
                break (step, f_y);
            }
            if trials > config.max_doublings {
                return Err(Error::LineSearchFailed { iteration: k, doublings: config.max_doublings });
            }
            m *= 2.0;
        };
        x = step.y;
        g = obj.gradient(&x);
        f = f_y;
        t.grad_evals += 1;
        m_next = m / 2.0;
        end = t.record(
            k,
            Sample {
                fval: f + psi.value(&x),
                grad_map: m * step.dist_sq_pinv.sqrt(),
                ls_trials: trials,
                m_k: m,
                a_k: None,
                eff_degree: None,
            },
        )?;
    }
    Ok(t.finish("adaptive-gm", prec, x, end.unwrap_or(Termination::MaxIters), vec![]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessFlag {
    /// `x0` is stationary; the trial constant is returned unchanged.
    ZeroDisplacement,
    /// No positive curvature along the trial step; fell back to `M0' / 64`.
    NonpositiveCurvature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub m: f64,
    pub flag: Option<GuessFlag>,
    pub matvecs: u64,
}

/// Curvature of `f` along one trial step with constant `m0`:
/// `(f(x1) - f(x0) - <g, x1 - x0>) / ((1/2) ||x1 - x0||^2_{P^-1})`.
pub fn initial_guess_m(obj: &CompositeObjective, prec: &Preconditioner, x0: &[f64], m0: f64) -> Result<InitialGuess> {
    check_start(obj, x0)?;
    let (f0, g) = obj.value_and_gradient(x0);
    let step = metric_step(m0, prec, obj.curvature(), x0, &g, obj.psi())?;
    if step.dist_sq_pinv == 0.0 {
        return Ok(InitialGuess { m: m0, flag: Some(GuessFlag::ZeroDisplacement), matvecs: step.matvecs });
    }
    let f1 = obj.value(&step.y);
    let lin = dot(&g, &step.y) - dot(&g, x0);
    let numer = f1 - f0 - lin;
    if !(numer > 0.0) {
        return Ok(InitialGuess { m: m0 / 64.0, flag: Some(GuessFlag::NonpositiveCurvature), matvecs: step.matvecs });
    }
    Ok(InitialGuess { m: numer / (0.5 * step.dist_sq_pinv), flag: None, matvecs: step.matvecs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SymmetricOperator;
    use crate::problems::{make_quadratic, SmoothFunction};
    use crate::solvers::StopRule;
    use std::sync::Arc;

    fn quad321() -> CompositeObjective {
        make_quadratic(SymmetricOperator::diagonal(&[3.0, 2.0, 1.0]), vec![0.0; 3]).unwrap().with_known_minimum(0.0)
    }

    #[test]
    fn gm_descends_and_contracts() {
        let obj = quad321();
        let r = run_gm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(50), &[1.0; 3]).unwrap();
        let f = r.values();
        assert!(f.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(r.records.len(), 51);
        assert_eq!(r.termination, Termination::MaxIters);
    }

    #[test]
    fn gm_fixed_point() {
        let obj = quad321();
        let r = run_gm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(5), &[0.0; 3]).unwrap();
        assert_eq!(r.x, vec![0.0; 3]);
    }

    #[test]
    fn gm_stops_on_gap() {
        let obj = quad321();
        let stop = StopRule { gap_tol: Some(1e-8), ..StopRule::default() };
        let r = run_gm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(1000).stop(stop), &[1.0; 3]).unwrap();
        assert_eq!(r.termination, Termination::TargetGap);
        assert!(r.final_value() <= 1e-8);
        assert_eq!(r.iterations_to_gap(1e-8), Some(r.iterations()));
    }

    #[test]
    fn gm_stops_on_stall() {
        let obj = quad321();
        let stop = StopRule { stall: Some(crate::solvers::Stall { window: 5, rel_tol: 1e-12 }), ..StopRule::default() };
        let r = run_gm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(10_000).stop(stop), &[1.0; 3]).unwrap();
        assert_eq!(r.termination, Termination::Stalled);
        assert!(r.iterations() < 10_000);
        assert!(r.final_value() <= 1e-11);
    }

    #[test]
    fn gm_reports_divergence() {
        let obj = quad321();
        let r = run_gm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(0.1).max_iters(2000), &[1.0; 3]);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn predicate_examples() {
        // f = x^2 / 2, x = 1, y = 0, M = 0.5: 0 <= 0.5 - 1 + 0.25 fails.
        assert!(!quadratic_growth_predicate(0.5, 0.5, &[1.0], &[1.0], &[0.0], 1.0, 0.0, 0.0));
        assert!(quadratic_growth_predicate(1.0, 0.5, &[1.0], &[1.0], &[0.0], 1.0, 0.0, 0.0));
        assert!(quadratic_growth_predicate(1e-3, 2.0, &[1.0, 2.0], &[1.0, 1.0], &[1.0, 1.0], 0.0, 2.0, 0.0));
    }

    #[test]
    fn adaptive_gm_with_exact_constant_accepts_first() {
        let obj = quad321();
        let r = run_adaptive_gm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(20), &[1.0; 3]).unwrap();
        assert_eq!(r.records[1].ls_trials, 1);
        assert!(r.records.iter().skip(1).all(|rec| rec.m_k <= 6.0));
    }

    #[test]
    fn adaptive_gm_recovers_from_tiny_guess() {
        let obj = quad321();
        let cfg = SolverConfig::with_m(1e-6).max_iters(200);
        let r = run_adaptive_gm(&obj, &Preconditioner::identity(), &cfg, &[1.0; 3]).unwrap();
        assert!(r.records[1].ls_trials > 10);
        assert!(r.final_value() < 1e-12);
    }

    #[test]
    fn adaptive_gm_caches_direction() {
        let obj = quad321();
        let p = Preconditioner::sympoly(obj.curvature(), 2, crate::preconditioners::TraceMode::Exact).unwrap();
        let r = run_adaptive_gm(&obj, &p, &SolverConfig::with_m(1e-3).max_iters(3), &[1.0; 3]).unwrap();
        assert_eq!(r.total_matvecs(), 3 * 2);
    }

    #[test]
    fn initial_guess_quadratic() {
        let obj = make_quadratic(SymmetricOperator::diagonal(&[2.0, 1.0]), vec![0.0; 2]).unwrap();
        let guess = initial_guess_m(&obj, &Preconditioner::identity(), &[1.0, 0.0], 1.0).unwrap();
        assert!((guess.m - 2.0).abs() < 1e-15);
        assert_eq!(guess.flag, None);
    }

    #[test]
    fn initial_guess_flags() {
        struct Linear;
        impl SmoothFunction for Linear {
            fn dim(&self) -> usize {
                2
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0] + 2.0 * x[1]
            }
            fn gradient(&self, _x: &[f64]) -> Vec<f64> {
                vec![1.0, 2.0]
            }
        }
        let obj = CompositeObjective::custom(Arc::new(Linear), SymmetricOperator::identity(2), 1.0, 0.0).unwrap();
        let guess = initial_guess_m(&obj, &Preconditioner::identity(), &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(guess.flag, Some(GuessFlag::NonpositiveCurvature));
        assert_eq!(guess.m, 1.0 / 64.0);

        let still = quad321();
        let guess = initial_guess_m(&still, &Preconditioner::identity(), &[0.0; 3], 5.0).unwrap();
        assert_eq!((guess.m, guess.flag), (5.0, Some(GuessFlag::ZeroDisplacement)));
    }
}
