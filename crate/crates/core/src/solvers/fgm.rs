//! Fast gradient method with estimating-sequence coefficients.

use crate::error::{Error, Result};
use crate::preconditioners::Preconditioner;
use crate::problems::{metric_step, CompositeObjective};
use crate::solvers::gm::quadratic_growth_predicate;
use crate::solvers::{check_start, RunResult, Sample, SolverConfig, Telemetry, Termination};

/// Positive root of `M a^2 / (A + a) = 1 + rho (A + a)`, i.e. of
/// `(M - rho) a^2 - (1 + 2 rho A) a - (A + rho A^2) = 0`.
pub fn solve_coefficient_equation(m: f64, rho: f64, a: f64) -> Result<f64> {
    if !(m > rho) || rho < 0.0 || a < 0.0 {
        return Err(Error::CoefficientEquation { m, rho });
    }
    let qa = m - rho;
    let qb = 1.0 + 2.0 * rho * a;
    let qc = a + rho * a * a;
    // Both terms of the numerator are positive, so nothing cancels.
    Ok((qb + (qb * qb + 4.0 * qa * qc).sqrt()) / (2.0 * qa))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgmState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: f64,
    pub k: usize,
}

impl FgmState {
    pub fn start(x0: &[f64]) -> Self {
        Self { x: x0.to_vec(), v: x0.to_vec(), a: 0.0, k: 0 }
    }
}

/// Everything one FGM step computes.
#[derive(Debug, Clone)]
pub struct FgmStep {
    pub state: FgmState,
    pub y: Vec<f64>,
    pub f_y: f64,
    pub g_y: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub a_plus: f64,
    pub h: f64,
    pub theta: f64,
    pub gamma: f64,
    /// `||v_+ - v_hat||^2_{P^-1}`; note `x_+ - y = theta (v_+ - v_hat)`.
    pub dist_sq_v: f64,
    pub matvecs: u64,
}

impl FgmStep {
    pub fn dist_sq_x(&self) -> f64 {
        self.theta * self.theta * self.dist_sq_v
    }
}

/// One step of the fast gradient method with constants `M` and `rho`.
pub fn fgm_step(obj: &CompositeObjective, prec: &Preconditioner, m: f64, rho: f64, state: &FgmState) -> Result<FgmStep> {
    let a_plus = solve_coefficient_equation(m, rho, state.a)?;
    let big_a = state.a + a_plus;
    let h = (1.0 + rho * big_a) / a_plus;
    let theta = a_plus / big_a;
    let omega = rho / h;
    let gamma = omega * (1.0 - theta) / (1.0 - omega * theta);
    let v_hat: Vec<f64> = if gamma == 0.0 {
        state.v.clone()
    } else {
        state.v.iter().zip(&state.x).map(|(v, x)| (1.0 - gamma) * v + gamma * x).collect()
    };
    let y: Vec<f64> = state.x.iter().zip(&v_hat).map(|(x, v)| (1.0 - theta) * x + theta * v).collect();
    let (f_y, g_y) = obj.value_and_gradient(&y);
    let step = metric_step(h, prec, obj.curvature(), &v_hat, &g_y, obj.psi())?;
    let x_plus = state.x.iter().zip(&step.y).map(|(x, v)| (1.0 - theta) * x + theta * v).collect();
    Ok(FgmStep {
        state: FgmState { x: x_plus, v: step.y, a: big_a, k: state.k + 1 },
        y,
        f_y,
        g_y,
        v_hat,
        a_plus,
        h,
        theta,
        gamma,
        dist_sq_v: step.dist_sq_pinv,
        matvecs: step.matvecs,
    })
}

/// Fixed-constant fast gradient method.
pub fn run_fgm(obj: &CompositeObjective, prec: &Preconditioner, config: &SolverConfig, x0: &[f64]) -> Result<RunResult> {
    check_start(obj, x0)?;
    let (m, rho) = (config.m, config.rho);
    if !(m > rho) {
        return Err(Error::CoefficientEquation { m, rho });
    }
    let psi = obj.psi();
    let mut t = Telemetry::new(obj, config.stop);
    let mut state = FgmState::start(x0);
    t.f_evals += 1;
    let f0 = obj.objective(x0);
    let mut end = t.record(
        0,
        Sample { fval: f0, grad_map: f64::NAN, ls_trials: 0, m_k: m, a_k: Some(0.0), eff_degree: None },
    )?;
    for k in 1..=config.max_iters {
        if end.is_some() {
            break;
        }
        let step = fgm_step(obj, prec, m, rho, &state)?;
        t.matvecs += step.matvecs;
        t.f_evals += 2;
        t.grad_evals += 1;
        let fval = obj.value(&step.state.x) + psi.value(&step.state.x);
        end = t.record(
            k,
            Sample {
                fval,
                grad_map: step.h * step.dist_sq_v.sqrt(),
                ls_trials: 1,
                m_k: m,
                a_k: Some(step.state.a),
                eff_degree: None,
            },
        )?;
        state = step.state;
    }
    Ok(t.finish("fgm", prec, state.x, end.unwrap_or(Termination::MaxIters), vec![]))
}

/// Fast gradient method with the predicate checked at `(y_k, x_{k+1})`.
///
/// Every trial recomputes the whole step, since `a_+` depends on `M`; the
/// state advances only on acceptance.
pub fn run_adaptive_fgm(obj: &CompositeObjective, prec: &Preconditioner, config: &SolverConfig, x0: &[f64]) -> Result<RunResult> {
    check_start(obj, x0)?;
    let rho = config.rho;
    if !(config.m > 0.0) || rho < 0.0 {
        return Err(Error::InvalidArgument(format!("need M > 0 and rho >= 0, got {} and {rho}", config.m)));
    }
    let psi = obj.psi();
    let mut t = Telemetry::new(obj, config.stop);
    let mut state = FgmState::start(x0);
    t.f_evals += 1;
    let mut end = t.record(
        0,
        Sample { fval: obj.objective(x0), grad_map: f64::NAN, ls_trials: 0, m_k: config.m, a_k: Some(0.0), eff_degree: None },
    )?;
    let scale = t.records[0].fval.abs();
    let mut m_next = config.m;
    for k in 1..=config.max_iters {
        if end.is_some() {
            break;
        }
        let mut m = m_next;
        let mut trials = 0u32;
        let mut doublings = 0u32;
        let (step, f_x) = loop {
            if m <= rho {
                m *= 2.0;
                doublings += 1;
                if doublings > 4 * config.max_doublings {
                    return Err(Error::LineSearchFailed { iteration: k, doublings });
                }
                continue;
            }
            trials += 1;
            let step = fgm_step(obj, prec, m, rho, &state)?;
            t.matvecs += step.matvecs;
            t.grad_evals += 1;
            let f_x = obj.value(&step.state.x);
            t.f_evals += 2;
            if quadratic_growth_predicate(m, step.f_y, &step.g_y, &step.y, &step.state.x, step.dist_sq_x(), f_x, scale) {
                break (step, f_x);
            }
            if trials > config.max_doublings {
                return Err(Error::LineSearchFailed { iteration: k, doublings: config.max_doublings });
            }
            m *= 2.0;
        };
        m_next = m / 2.0;
        end = t.record(
            k,
            Sample {
                fval: f_x + psi.value(&step.state.x),
                grad_map: step.h * step.dist_sq_v.sqrt(),
                ls_trials: trials,
                m_k: m,
                a_k: Some(step.state.a),
                eff_degree: None,
            },
        )?;
        state = step.state;
    }
    Ok(t.finish("adaptive-fgm", prec, state.x, end.unwrap_or(Termination::MaxIters), vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::random::{log_uniform_spectrum, random_spd_with_spectrum, rng_from_seed};
    use crate::operators::SymmetricOperator;
    use crate::problems::make_quadratic;
    use crate::solvers::StopRule;

    #[test]
    fn coefficient_equation_examples() {
        assert_eq!(solve_coefficient_equation(1.0, 0.0, 0.0).unwrap(), 1.0);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((solve_coefficient_equation(1.0, 0.0, 1.0).unwrap() - phi).abs() < 1e-15);
        assert!((solve_coefficient_equation(4.0, 1.0, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!(matches!(solve_coefficient_equation(1.0, 1.0, 0.0), Err(Error::CoefficientEquation { .. })));
    }

    #[test]
    fn coefficient_identity_for_large_a() {
        for &(m, rho, a) in &[(1e3, 0.0, 1e12), (10.0, 9.999, 1e8), (2.0, 1e-9, 0.0)] {
            let ap = solve_coefficient_equation(m, rho, a).unwrap();
            let big = a + ap;
            assert!((m * ap * ap / big - (1.0 + rho * big)).abs() <= 1e-10 * (1.0 + rho * big));
        }
    }

    fn quad() -> CompositeObjective {
        make_quadratic(SymmetricOperator::diagonal(&[3.0, 2.0, 1.0]), vec![0.0; 3]).unwrap().with_known_minimum(0.0)
    }

    #[test]
    fn first_step_starts_at_x0() {
        let obj = quad();
        let s0 = FgmState::start(&[1.0, 1.0, 1.0]);
        let step = fgm_step(&obj, &Preconditioner::identity(), 3.0, 0.5, &s0).unwrap();
        assert_eq!(step.theta, 1.0);
        assert_eq!(step.y, vec![1.0; 3]);
        assert_eq!(step.v_hat, vec![1.0; 3]);
        let s1 = step.state.clone();
        let step = fgm_step(&obj, &Preconditioner::identity(), 3.0, 0.0, &s1).unwrap();
        assert_eq!(step.gamma, 0.0);
        assert_eq!(step.v_hat, s1.v);
        let big = step.state.a;
        assert!((3.0 * step.a_plus * step.a_plus / big - 1.0).abs() < 1e-12);
    }

    #[test]
    fn a_k_growth_bounds() {
        let obj = quad();
        let m = 3.0;
        let r = run_fgm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(m).max_iters(100), &[1.0; 3]).unwrap();
        for rec in &r.records[1..] {
            let k = rec.k as f64;
            assert!(rec.a_k.unwrap() >= k * k / (4.0 * m));
        }
        let rho = 1.0;
        let q = (rho / m).sqrt();
        let r = run_fgm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(m).rho(rho).max_iters(100), &[1.0; 3]).unwrap();
        for rec in &r.records[1..] {
            let bound = 1.0 / (m * (1.0 - q).powi(rec.k as i32 - 1));
            assert!(rec.a_k.unwrap() >= bound * (1.0 - 1e-12));
        }
    }

    #[test]
    fn converges_on_ill_conditioned_quadratic() {
        let mut rng = rng_from_seed(9);
        let spectrum = log_uniform_spectrum(&mut rng, 10, 1e3);
        let b = random_spd_with_spectrum(&mut rng, &spectrum);
        let obj = make_quadratic(SymmetricOperator::dense(b).unwrap(), vec![0.0; 10]).unwrap().with_known_minimum(0.0);
        let x0 = vec![1.0; 10];
        let f0 = obj.value(&x0);
        // rho = alpha mu = lambda_n; the linear rate needs about sqrt(1e3) ln(1e9) ~ 650 steps.
        let budget = (1e3f64.sqrt() * 1e9f64.ln()).ceil() as usize;
        let stop = StopRule { gap_tol: Some(1e-9 * f0), ..StopRule::default() };
        let cfg = SolverConfig::with_m(1e3).rho(1.0).max_iters(budget).stop(stop);
        let r = run_fgm(&obj, &Preconditioner::identity(), &cfg, &x0).unwrap();
        assert_eq!(r.termination, Termination::TargetGap, "final gap {}", r.final_value());
    }

    #[test]
    fn adaptive_with_exact_constant_matches_fixed() {
        let obj = quad();
        let x0 = [1.0, -2.0, 0.5];
        let fixed = run_fgm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(1), &x0).unwrap();
        let adaptive = run_adaptive_fgm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(3.0).max_iters(1), &x0).unwrap();
        assert_eq!(fixed.x, adaptive.x);
        assert_eq!(adaptive.records[1].ls_trials, 1);
    }

    #[test]
    fn adaptive_fgm_converges_from_bad_guess() {
        let obj = quad();
        for m0 in [1e-4, 1e4] {
            let r = run_adaptive_fgm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(m0).max_iters(300), &[1.0; 3]).unwrap();
            assert!(r.final_value() < 1e-12, "m0 = {m0}: {}", r.final_value());
            if m0 <= 3.0 {
                assert!(r.records[1..].iter().all(|rec| rec.m_k <= 6.0));
            }
        }
    }

    #[test]
    fn rejects_m_not_above_rho() {
        let obj = quad();
        let r = run_fgm(&obj, &Preconditioner::identity(), &SolverConfig::with_m(1.0).rho(1.0), &[1.0; 3]);
        assert!(matches!(r, Err(Error::CoefficientEquation { .. })));
    }
}
