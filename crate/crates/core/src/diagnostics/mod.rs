//! Verifiers for the spectral identities of the preconditioners and for the
//! convergence-rate guarantees of the fixed-step methods.
//!
//! Every check returns a [`CheckReport`]; [`run_suite`] bundles a
//! deterministic selection of them.

mod bounds;
mod envelopes;
mod report;
mod spectral;
mod volume;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

pub use bounds::{gap_collapse, krylov_dominance, predicted_bounds, verify_polynomial_bounds, xi_table, XiRow, XiTable};
pub use envelopes::{coefficient_identity, fgm_envelopes, gm_envelopes, EnvelopeCheck, EnvelopeParams};
pub use report::{CheckReport, Detail};
pub use spectral::{complementary_sigma, sympoly_dense, verify_adjugate, verify_eigenpairs, verify_sandwich};
pub use volume::{subsets, volume_sampling_expectation, VolumeSamplingReport};

use crate::error::Result;
use crate::operators::random::{gaussian_vector, log_uniform_spectrum, random_spd_with_spectrum, rng_from_seed};
use crate::operators::{DenseMatrix, SymmetricOperator};
use crate::preconditioners::{Preconditioner, TraceMode};
use crate::problems::{
    make_quadratic, make_regression, validate_bounds, Loss, RegressionData, RegressionOptions, SparseRows,
};
use crate::krylov::run_krylov_gm;
use crate::solvers::{run_fgm, run_gm, SolverConfig, StopRule};

/// Random SPD matrix with log-uniform spectrum in `[1, cond]` and a random eigenbasis.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> DenseMatrix {
    let spec = log_uniform_spectrum(rng, n, cond);
    random_spd_with_spectrum(rng, &spec)
}

/// Runs GM with `M = beta L` and FGM with `rho = 0` and `rho = alpha mu` on a
/// quadratic `(1/2) x^T B x` from `x0`, checking every envelope of each run.
pub fn quadratic_rate_checks(b: &DenseMatrix, prec: &Preconditioner, x0: &[f64], iters: usize) -> Result<Vec<EnvelopeCheck>> {
    let n = b.rows();
    let obj = make_quadratic(SymmetricOperator::dense(b.clone())?, vec![0.0; n])?.with_known_minimum(0.0);
    let q = prec.quality(obj.curvature())?;
    let (l, mu) = (obj.lipschitz(), obj.strong_convexity());
    let r_sq = obj.curvature().b_norm_sq(x0)?;
    let strong = EnvelopeParams { alpha: q.alpha, beta: q.beta, l, mu, r_sq, f_star: 0.0 };
    let convex = EnvelopeParams { mu: 0.0, ..strong };
    let cfg = SolverConfig::with_m(q.beta * l).max_iters(iters);

    let mut out = gm_envelopes(&run_gm(&obj, prec, &cfg, x0)?, &strong);
    out.extend(fgm_envelopes(&run_fgm(&obj, prec, &cfg, x0)?, &convex, 0.0));
    let rho = q.alpha * mu;
    out.extend(fgm_envelopes(&run_fgm(&obj, prec, &cfg.clone().rho(rho), x0)?, &strong, rho));
    Ok(out)
}

/// Outcome of [`run_suite`].
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn failures(&self) -> Vec<&CheckReport> {
        self.checks.iter().filter(|c| c.hard_fail()).collect()
    }
}

fn group(name: &str, params: serde_json::Value, parts: impl IntoIterator<Item = Result<CheckReport>>) -> Result<CheckReport> {
    let mut r = CheckReport::new(name, params);
    for p in parts {
        r.merge(p?);
    }
    Ok(r)
}

/// A desk-scale pass over every verifier, deterministic in `seed`.
pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let mut rng = rng_from_seed(seed);
    let mut checks = Vec::new();

    let mut mats = Vec::new();
    for _ in 0..12 {
        let n = rng.random_range(2..=8);
        mats.push(random_spd(&mut rng, n, 10.0));
    }
    checks.push(group(
        "sympoly_eigenpairs",
        json!({"matrices": mats.len(), "cond": 10.0, "tol": 1e-8}),
        mats.iter().flat_map(|b| (0..b.rows()).map(move |t| verify_eigenpairs(b, t, 1e-8))),
    )?);
    checks.push(group(
        "adjugate",
        json!({"matrices": mats.len(), "tol": 1e-8}),
        mats.iter().map(|b| verify_adjugate(b, 1e-8)),
    )?);
    checks.push(group(
        "sandwich",
        json!({"matrices": mats.len(), "tol": 1e-9}),
        mats.iter().flat_map(|b| (0..b.rows()).map(move |t| verify_sandwich(b, t, 1e-9))),
    )?);

    let mut vs = CheckReport::new("volume_sampling", json!({"tol": 1e-10}));
    for _ in 0..5 {
        let n = rng.random_range(2..=6);
        let b = random_spd(&mut rng, n, 10.0);
        for m in 1..=n.min(4) {
            let r = volume_sampling_expectation(&b, m)?;
            vs.item(format!("n = {n}, m = {m}"), r.max_relative_deviation, 1e-10);
            vs.item(
                format!("n = {n}, m = {m} constant"),
                (r.constant - r.predicted_constant).abs() / r.predicted_constant,
                1e-10,
            );
        }
    }
    checks.push(vs);

    let mut spectra = Vec::new();
    for _ in 0..5 {
        let n = rng.random_range(3..=12);
        spectra.push(log_uniform_spectrum(&mut rng, n, 1e3));
    }
    checks.push(group(
        "xi_tables",
        json!({"spectra": spectra.len()}),
        spectra.iter().map(|s| xi_table(s, s.len() - 1).map(|t| t.report)),
    )?);
    let gapped: Vec<f64> = [1e3, 1e3].into_iter().chain(std::iter::repeat_n(1.0, 6)).collect();
    checks.push(gap_collapse(&gapped, 2)?);
    checks.push(group(
        "polynomial_bounds",
        json!({"spectra": spectra.len(), "tol": 1e-10}),
        spectra.iter().flat_map(|s| (0..s.len()).map(move |t| verify_polynomial_bounds(s, t, 1e-10))),
    )?);

    let mut env = CheckReport::new("rate_envelopes", json!({"n": 20, "cond": 1e3, "iters": 200}));
    let mut coef = CheckReport::new("fgm_coefficient_identity", json!({"tol": 1e-10}));
    let b = random_spd(&mut rng, 20, 1e3);
    let op = SymmetricOperator::dense(b.clone())?;
    let x0 = gaussian_vector(&mut rng, 20);
    for tau in 0..=2 {
        let prec = Preconditioner::sympoly(&op, tau, TraceMode::Exact)?;
        for c in quadratic_rate_checks(&b, &prec, &x0, 200)? {
            env.merge(c.to_report());
        }
        let obj = make_quadratic(SymmetricOperator::dense(b.clone())?, vec![0.0; 20])?;
        let run = run_fgm(&obj, &prec, &SolverConfig::with_m(prec.quality(&op)?.beta).max_iters(200), &x0)?;
        coef.merge(coefficient_identity(&run, 0.0, 1e-10));
    }
    checks.push(env);
    checks.push(coef);

    let obj = make_quadratic(op, gaussian_vector(&mut rng, 20))?;
    let mut dom = CheckReport::new("krylov_dominance", json!({"tau": [1, 2, 3]}));
    for tau in 1..=3 {
        let x = gaussian_vector(&mut rng, 20);
        dom.merge(krylov_dominance(&obj, &x, tau)?);
    }
    checks.push(dom);
    let run = run_krylov_gm(&obj, 2, &SolverConfig::default().max_iters(50).stop(StopRule::default()), &x0)?;
    let mut mono = CheckReport::new("krylov_monotone", json!({"tau": 2, "iters": 50}));
    let rise = run.values().windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    mono.item("max increase of f", rise, 1e-12 * run.values()[0].abs().max(1.0));
    checks.push(mono);

    let mut val = CheckReport::new("validators", json!({"trials": 20}));
    for (name, obj) in shipped_objectives(&mut rng)? {
        let r = validate_bounds(&obj, 20, rng.random())?;
        val.item(format!("{name} gradient"), r.max_gradient_rel_err, crate::problems::GRADIENT_TOL);
        val.item(format!("{name} curvature"), r.max_curvature_slack, crate::problems::CURVATURE_TOL);
    }
    checks.push(val);

    let pass = checks.iter().all(|c| !c.hard_fail());
    Ok(SuiteReport { seed, pass, checks })
}

/// One small instance of each objective family the crate ships.
pub fn shipped_objectives(rng: &mut ChaCha8Rng) -> Result<Vec<(String, crate::problems::CompositeObjective)>> {
    let (m, n) = (40, 8);
    let a = DenseMatrix::from_columns_fn(m, n, |_| gaussian_vector(rng, m));
    let rows = SparseRows::from_dense(&a);
    let b = gaussian_vector(rng, m);
    let labels: Vec<f64> = (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let quad = make_quadratic(SymmetricOperator::dense(random_spd(rng, n, 100.0))?, gaussian_vector(rng, n))?;
    let huber = make_regression(RegressionData::new(rows.clone(), b, Loss::Huber { mu: 0.1 })?, RegressionOptions::default())?;
    let logistic = make_regression(RegressionData::logistic_from_labels(rows.clone(), &labels)?, RegressionOptions::default())?;
    let ridge = make_regression(
        RegressionData::logistic_from_labels(rows, &labels)?,
        RegressionOptions { l2: 1e-2, ..RegressionOptions::default() },
    )?;
    Ok(vec![
        ("quadratic".into(), quad),
        ("huber".into(), huber),
        ("logistic".into(), logistic),
        ("logistic_l2".into(), ridge),
    ])
}
