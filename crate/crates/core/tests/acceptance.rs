//! Acceptance gate. Every criterion prints one PASS/FAIL line; the process
//! exits nonzero when any of them fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use polyprec::diagnostics::{
    coefficient_identity, fgm_envelopes, krylov_dominance, quadratic_rate_checks, random_spd, shipped_objectives,
    verify_adjugate, verify_eigenpairs, verify_polynomial_bounds, verify_sandwich, volume_sampling_expectation,
    EnvelopeParams,
};
use polyprec::experiments::{bench, build_problem, load_config, run_experiment_with, ExperimentConfig, FStarSource, ProblemSource, RunSummary};
use polyprec::krylov::run_krylov_gm;
use polyprec::operators::random::{gaussian_vector, log_uniform_spectrum, rng_from_seed};
use polyprec::operators::vector::dot;
use polyprec::preconditioners::{Descriptor, Preconditioner, TraceMode};
use polyprec::problems::{make_quadratic, validate_bounds, CompositeObjective, Loss, CURVATURE_TOL, GRADIENT_TOL};
use polyprec::solvers::{run_adaptive_fgm, run_adaptive_gm, run_fgm, theory_constants, Method, SolverConfig, StopRule};
use polyprec::SymmetricOperator;

type Outcome = (bool, String);

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core").join(rel)
}

fn random_cond(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn c1_spectral_identities() -> Outcome {
    let t = Instant::now();
    let mut rng = rng_from_seed(101);
    let (mut eig, mut adj, mut sand) = (0.0f64, 0.0f64, 0.0f64);
    let mut pass = true;
    for _ in 0..50 {
        let n = rng.random_range(2..=8);
        let b = random_spd(&mut rng, n, 10.0);
        for tau in 0..n {
            let l = verify_eigenpairs(&b, tau, 1e-8).unwrap();
            let s = verify_sandwich(&b, tau, 1e-9).unwrap();
            pass &= l.pass && s.pass;
            eig = eig.max(l.max_slack + 1e-8);
            sand = sand.max(s.max_slack + 1e-9);
        }
        let a = verify_adjugate(&b, 1e-8).unwrap();
        pass &= a.pass;
        adj = adj.max(a.max_slack + 1e-8);
    }
    let dt = t.elapsed();
    pass &= dt < Duration::from_secs(10);
    (pass, format!("max deviation eigenpairs {eig:.2e}, adjugate {adj:.2e}, sandwich {sand:.2e}; {dt:.2?}"))
}

fn c2_volume_sampling() -> Outcome {
    let t = Instant::now();
    let mut rng = rng_from_seed(102);
    let mut worst = 0.0f64;
    let mut worst_const = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let b = random_spd(&mut rng, n, 10.0);
        for m in 1..=n.min(4) {
            let r = volume_sampling_expectation(&b, m).unwrap();
            worst = worst.max(r.max_relative_deviation);
            worst_const = worst_const.max((r.constant - r.predicted_constant).abs() / r.predicted_constant);
        }
    }
    let dt = t.elapsed();
    let pass = worst <= 1e-10 && worst_const <= 1e-10 && dt < Duration::from_secs(5);
    (pass, format!("max deviation from c P_(m-1) {worst:.2e}, constant vs 1/sigma_m {worst_const:.2e}; {dt:.2?}"))
}

fn c3_rate_envelopes() -> Outcome {
    let t = Instant::now();
    let mut rng = rng_from_seed(103);
    let (mut checks, mut violations, mut worst) = (0usize, 0usize, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(2..=50);
        let cond = random_cond(&mut rng, 10.0, 1e4);
        let b = random_spd(&mut rng, n, cond);
        let x0 = gaussian_vector(&mut rng, n);
        let op = SymmetricOperator::dense(b.clone()).unwrap();
        for tau in 0..=2usize.min(n - 1) {
            let prec = Preconditioner::sympoly(&op, tau, TraceMode::Exact).unwrap();
            for c in quadratic_rate_checks(&b, &prec, &x0, 500).unwrap() {
                if c.envelope.starts_with("fgm_weights") {
                    continue;
                }
                checks += 1;
                violations += c.violations;
                worst = worst.max(c.max_ratio);
            }
        }
    }
    let dt = t.elapsed();
    let pass = violations == 0 && dt < Duration::from_secs(60);
    (pass, format!("{checks} envelopes over k <= 500, {violations} violations, max gap/bound {worst:.3}; {dt:.2?}"))
}

fn c4_fgm_internals() -> Outcome {
    let mut rng = rng_from_seed(104);
    let (mut identity, mut weight_violations, mut runs) = (0.0f64, 0usize, 0usize);
    let mut pass = true;
    for _ in 0..10 {
        let n = rng.random_range(2..=40);
        let cond = random_cond(&mut rng, 10.0, 1e4);
        let b = random_spd(&mut rng, n, cond);
        let x0 = gaussian_vector(&mut rng, n);
        let obj = make_quadratic(SymmetricOperator::dense(b).unwrap(), vec![0.0; n]).unwrap().with_known_minimum(0.0);
        for tau in 0..=2usize.min(n - 1) {
            let prec = Preconditioner::sympoly(obj.curvature(), tau, TraceMode::Exact).unwrap();
            let tc = theory_constants(&obj, &prec).unwrap();
            let p = EnvelopeParams {
                alpha: tc.alpha,
                beta: tc.beta,
                l: tc.l,
                mu: tc.mu,
                r_sq: obj.curvature().b_norm_sq(&x0).unwrap(),
                f_star: 0.0,
            };
            for rho in [0.0, tc.rho] {
                let run = run_fgm(&obj, &prec, &SolverConfig::with_m(tc.m).rho(rho).max_iters(300), &x0).unwrap();
                let r = coefficient_identity(&run, rho, 1e-10);
                pass &= r.pass;
                identity = identity.max(r.max_slack + 1e-10);
                for c in fgm_envelopes(&run, &p, rho).iter().filter(|c| c.envelope.starts_with("fgm_weights")) {
                    weight_violations += c.violations;
                }
                runs += 1;
            }
        }
    }
    // The identity is algebraic, so it must also hold along an adaptive M sequence.
    let obj = fixture_logistic();
    let prec = Preconditioner::sympoly(obj.curvature(), 2, TraceMode::Exact).unwrap();
    let run = run_adaptive_fgm(&obj, &prec, &SolverConfig::with_m(1.0).max_iters(200), &vec![0.0; obj.dim()]).unwrap();
    let r = coefficient_identity(&run, 0.0, 1e-10);
    pass &= r.pass;
    identity = identity.max(r.max_slack + 1e-10);
    pass &= weight_violations == 0;
    (pass, format!("{} runs, max identity residual {identity:.2e}, A_k lower-bound violations {weight_violations}", runs + 1))
}

fn steepest_descent(b: &polyprec::DenseMatrix, rhs: &[f64], x0: &[f64], iters: usize) -> Vec<Vec<f64>> {
    let mut xs = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for _ in 0..iters {
        let bx = b.mul_vec(&x);
        let g: Vec<f64> = bx.iter().zip(rhs).map(|(a, r)| a - r).collect();
        let gg = dot(&g, &g);
        if gg == 0.0 {
            break;
        }
        let t = gg / dot(&g, &b.mul_vec(&g));
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= t * gi;
        }
        xs.push(x.clone());
    }
    xs
}

fn c5_krylov_optimality() -> Outcome {
    let mut rng = rng_from_seed(105);
    let mut traj = 0.0f64;
    for _ in 0..5 {
        let n = rng.random_range(3..=20);
        let b = random_spd(&mut rng, n, 100.0);
        let rhs = gaussian_vector(&mut rng, n);
        let x0 = gaussian_vector(&mut rng, n);
        let obj = make_quadratic(SymmetricOperator::dense(b.clone()).unwrap(), rhs.clone()).unwrap();
        let run = run_krylov_gm(&obj, 0, &SolverConfig::default().max_iters(30), &x0).unwrap();
        let sd = steepest_descent(&b, &rhs, &x0, 30);
        let f_sd: Vec<f64> = sd.iter().map(|x| obj.value(x)).collect();
        for (r, f) in run.records.iter().zip(&f_sd) {
            traj = traj.max((r.fval - f).abs() / f.abs().max(1.0));
        }
        let x_sd = sd.last().unwrap();
        let dx = run.x.iter().zip(x_sd).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        traj = traj.max(dx / x_sd.iter().map(|v| v.abs()).fold(1.0, f64::max));
    }

    let mut dom_pass = true;
    let mut dom_items = 0;
    for _ in 0..20 {
        let n = rng.random_range(5..=30);
        let cond = random_cond(&mut rng, 10.0, 1e3);
        let b = random_spd(&mut rng, n, cond);
        let obj = make_quadratic(SymmetricOperator::dense(b).unwrap(), gaussian_vector(&mut rng, n)).unwrap();
        let x = gaussian_vector(&mut rng, n);
        for tau in 1..=3 {
            let r = krylov_dominance(&obj, &x, tau).unwrap();
            dom_pass &= r.pass;
            dom_items += r.details.len();
        }
    }

    let mut rise = f64::NEG_INFINITY;
    for (_, obj) in benchmark_objectives() {
        for tau in 1..=3 {
            let run = run_krylov_gm(&obj, tau, &SolverConfig::default().max_iters(100), &vec![0.0; obj.dim()]).unwrap();
            let v = run.values();
            let scale = v[0].abs().max(1.0);
            rise = rise.max(v.windows(2).map(|w| (w[1] - w[0]) / scale).fold(f64::NEG_INFINITY, f64::max));
        }
    }
    let pass = traj <= 1e-12 && dom_pass && rise <= 1e-12;
    (
        pass,
        format!("tau = 0 vs exact line search {traj:.2e}; dominance {dom_items} comparisons ok = {dom_pass}; max relative rise of f {rise:.2e}"),
    )
}

fn c6_polynomial_bounds() -> Outcome {
    let mut rng = rng_from_seed(106);
    let (mut cut, mut cheb) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut pass = true;
    for _ in 0..20 {
        let n = rng.random_range(3..=16);
        let cond = random_cond(&mut rng, 10.0, 1e4);
        let spectrum = log_uniform_spectrum(&mut rng, n, cond);
        for tau in 0..n {
            let r = verify_polynomial_bounds(&spectrum, tau, 1e-10).unwrap();
            pass &= r.pass;
            for d in &r.details {
                let excess = d.measured - (d.allowed - 1e-10);
                match d.label.as_str() {
                    "cutting gamma" => cut = cut.max(excess),
                    "chebyshev gamma" => cheb = cheb.max(excess),
                    _ => {}
                }
            }
        }
    }
    (pass, format!("max (gamma - bound) cutting {cut:.2e}, chebyshev {cheb:.2e} over 20 spectra, all degrees"))
}

fn huber_iterations(lambda1: f64, lambda2: f64, tau: usize) -> Option<usize> {
    let mut c = ExperimentConfig::default();
    c.problem.source = ProblemSource::Synthetic { lambda1, lambda2, tail: 1.0, n: 100 };
    c.problem.loss = Loss::Huber { mu: 0.1 };
    c.precond = Some(Descriptor::sympoly(tau));
    c.max_iters = 20_000;
    c.tol = 1e-6;
    run_experiment_with(&c, Some((0.0, FStarSource::Known))).unwrap().summary.iterations_to_tol
}

fn c7_gap_insensitivity() -> Outcome {
    let t = Instant::now();
    let it = |l1, l2, tau| huber_iterations(l1, l2, tau).map_or(f64::INFINITY, |k| k as f64);
    let (p0_lo, p0_hi) = (it(10.0, 1.0, 0), it(100.0, 1.0, 0));
    let (p1_lo, p1_hi) = (it(10.0, 1.0, 1), it(100.0, 1.0, 1));
    let (p2_lo, p2_hi) = (it(1000.0, 10.0, 2), it(1000.0, 100.0, 2));
    let grow = p0_hi / p0_lo;
    let change1 = (p1_hi - p1_lo).abs() / p1_lo;
    let change2 = (p2_hi - p2_lo).abs() / p2_lo;
    let dt = t.elapsed();
    let pass = grow >= 5.0 && change1 <= 0.2 && change2 <= 0.2 && dt < Duration::from_secs(120);
    (
        pass,
        format!(
            "lambda1 10 -> 100: GM+P0 {p0_lo} -> {p0_hi} (x{grow:.2}), GM+P1 {p1_lo} -> {p1_hi} ({:+.0}%); \
             lambda2 10 -> 100 at lambda1 = 1000: GM+P2 {p2_lo} -> {p2_hi} ({:+.0}%); {dt:.2?}",
            100.0 * (p1_hi - p1_lo) / p1_lo,
            100.0 * (p2_hi - p2_lo) / p2_lo,
        ),
    )
}

fn fixture_logistic() -> CompositeObjective {
    let mut c = ExperimentConfig::default();
    c.problem.source = ProblemSource::Dataset { path: manifest("tests/data/categorical.libsvm") };
    c.problem.loss = Loss::Logistic;
    c.problem.standardize = false;
    build_problem(&c.problem).unwrap().objective
}

fn benchmark_objectives() -> Vec<(String, CompositeObjective)> {
    let mut out = vec![("categorical logistic".to_string(), fixture_logistic())];
    for (l1, loss) in [(10.0, Loss::Huber { mu: 0.1 }), (100.0, Loss::Huber { mu: 0.1 }), (10.0, Loss::Logistic)] {
        let mut c = ExperimentConfig::default();
        c.problem.source = ProblemSource::Synthetic { lambda1: l1, lambda2: 1.0, tail: 1.0, n: 100 };
        c.problem.loss = loss;
        out.push((format!("synthetic {loss} lambda1 = {l1}"), build_problem(&c.problem).unwrap().objective));
    }
    out
}

fn logreg_bench(out: &Path) -> Vec<RunSummary> {
    let configs = load_config(manifest("examples/configs/logreg.conf")).unwrap();
    bench(&configs, Some(out)).unwrap().runs
}

fn c8_speedup_ordering(runs: &[RunSummary]) -> Outcome {
    let find = |method: Method, tau: usize| {
        runs.iter()
            .find(|r| {
                r.config.method == method
                    && if method == Method::Krylov { r.config.tau == tau } else { r.config.precond == Some(Descriptor::sympoly(tau)) }
            })
            .and_then(|r| r.iterations_to_tol)
            .map_or(f64::INFINITY, |k| k as f64)
    };
    let gm: Vec<f64> = (0..=2).map(|t| find(Method::Gm, t)).collect();
    let (fgm0, fgm2) = (find(Method::Fgm, 0), find(Method::Fgm, 2));
    let krylov = find(Method::Krylov, 3);
    let r_gm = gm[2] / gm[0];
    let r_fgm = fgm2 / fgm0;
    let pass = r_gm <= 0.7 && r_fgm <= 0.8 && gm.iter().all(|&g| krylov <= g);
    (
        pass,
        format!(
            "GM P0/P1/P2 {}/{}/{} (P2/P0 = {r_gm:.2}), FGM P0/P2 {fgm0}/{fgm2} (ratio {r_fgm:.2}), Krylov tau = 3 {krylov}",
            gm[0], gm[1], gm[2]
        ),
    )
}

fn c9_adaptive_efficiency() -> Outcome {
    let (mut worst_avg, mut worst_m) = (0.0f64, 0.0f64);
    let mut runs = 0;
    for (_, obj) in benchmark_objectives() {
        for tau in 0..=2 {
            let prec = Preconditioner::sympoly(obj.curvature(), tau, TraceMode::Exact).unwrap();
            let tc = theory_constants(&obj, &prec).unwrap();
            for frac in [1.0, 0.1, 1e-3] {
                let cfg = SolverConfig::with_m(frac * tc.m).max_iters(200).stop(StopRule::default());
                let run = run_adaptive_gm(&obj, &prec, &cfg, &vec![0.0; obj.dim()]).unwrap();
                let steps = &run.records[1..];
                let trials: u32 = steps.iter().map(|r| r.ls_trials).sum();
                worst_avg = worst_avg.max(trials as f64 / steps.len() as f64);
                worst_m = worst_m.max(steps.iter().map(|r| r.m_k / tc.m).fold(0.0, f64::max));
                runs += 1;
            }
        }
    }
    let pass = worst_avg <= 2.5 && worst_m <= 2.0;
    (pass, format!("{runs} runs of 200 iterations: max mean predicate evaluations {worst_avg:.3}, max M_k/(beta L) {worst_m:.3}"))
}

fn c10_validators() -> Outcome {
    let mut rng = rng_from_seed(110);
    let mut objs = shipped_objectives(&mut rng).unwrap();
    objs.extend(benchmark_objectives());
    let (mut grad, mut curv) = (0.0f64, f64::NEG_INFINITY);
    for (i, (_, obj)) in objs.iter().enumerate() {
        let r = validate_bounds(obj, 20, 1000 + i as u64).unwrap();
        grad = grad.max(r.max_gradient_rel_err);
        curv = curv.max(r.max_curvature_slack);
    }
    let pass = grad <= GRADIENT_TOL && curv <= CURVATURE_TOL;
    (pass, format!("{} objectives: max gradient rel err {grad:.2e}, max curvature slack {curv:.2e}", objs.len()))
}

fn csv_without_time(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| &header[i] != "time_ms").collect();
    r.records().map(|rec| keep.iter().map(|&i| rec.as_ref().unwrap()[i].to_string()).collect()).collect()
}

fn csv_files(dir: &Path) -> BTreeMap<String, PathBuf> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), p))
        .collect()
}

fn c11_determinism(first: &Path, second: &Path) -> Outcome {
    logreg_bench(second);
    let (a, b) = (csv_files(first), csv_files(second));
    let mut differing = 0;
    if a.keys().ne(b.keys()) {
        return (false, "the two runs wrote different file sets".into());
    }
    for (name, pa) in &a {
        if csv_without_time(pa) != csv_without_time(&b[name]) {
            differing += 1;
        }
    }
    (differing == 0 && !a.is_empty(), format!("{} CSVs compared, {differing} differ", a.len()))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("first"), dir.path().join("second"));
    let t = Instant::now();
    let logreg = logreg_bench(&first);
    println!("logistic bench: {} runs [{:.2?}]", logreg.len(), t.elapsed());

    type Criterion = Box<dyn FnOnce() -> Outcome>;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("spectral identities", Box::new(c1_spectral_identities)),
        ("volume sampling", Box::new(c2_volume_sampling)),
        ("rate envelopes", Box::new(c3_rate_envelopes)),
        ("fgm internals", Box::new(c4_fgm_internals)),
        ("krylov optimality", Box::new(c5_krylov_optimality)),
        ("cutting and chebyshev bounds", Box::new(c6_polynomial_bounds)),
        ("gap insensitivity", Box::new(c7_gap_insensitivity)),
        ("speedup ordering", Box::new(move || c8_speedup_ordering(&logreg))),
        ("adaptive efficiency", Box::new(c9_adaptive_efficiency)),
        ("validators", Box::new(c10_validators)),
        ("determinism", Box::new(move || c11_determinism(&first, &second))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = check();
        failed += usize::from(!pass);
        println!("{} criterion {:>2} {name}: {detail} [{:.2?}]", if pass { "PASS" } else { "FAIL" }, i + 1, t.elapsed());
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
