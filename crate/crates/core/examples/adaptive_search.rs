//! Adaptive GM and FGM need no `beta L`: they start from a one-step curvature
//! guess and halve or double `M` as the descent test allows.

use polyprec::experiments::{synth_regression, SyntheticSpectrumSpec};
use polyprec::problems::Loss;
use polyprec::solvers::{initial_guess_m, run_adaptive_fgm, run_adaptive_gm, theory_constants};
use polyprec::{Preconditioner, SolverConfig, StopRule, TraceMode};

fn main() -> polyprec::Result<()> {
    let spec = SyntheticSpectrumSpec::pattern(200.0, 1.0, 1.0, 60, 11)?;
    let problem = synth_regression(&spec, Loss::Huber { mu: 0.1 })?;
    let obj = problem.objective;
    let x0 = vec![0.0; obj.dim()];
    let stop = StopRule { gap_tol: Some(1e-6), ..StopRule::default() };

    for tau in [0, 1] {
        let prec = Preconditioner::sympoly(obj.curvature(), tau, TraceMode::Exact)?;
        let guess = initial_guess_m(&obj, &prec, &x0, obj.lipschitz())?;
        let beta_l = theory_constants(&obj, &prec)?.m;
        println!("P_{tau}: beta L = {beta_l:.4e}, initial guess M0 = {:.4e}", guess.m);

        let cfg = SolverConfig::with_m(guess.m).max_iters(50_000).stop(stop);
        for run in [run_adaptive_gm(&obj, &prec, &cfg, &x0)?, run_adaptive_fgm(&obj, &prec, &cfg, &x0)?] {
            let trials: u32 = run.records.iter().map(|r| r.ls_trials).sum();
            let m_max = run.records.iter().map(|r| r.m_k).fold(0.0, f64::max);
            println!(
                "  {:<13} {:>6} iters, {:>6} trials, max M_k / beta L = {:.3}, {}",
                run.method,
                run.iterations(),
                trials,
                m_max / beta_l,
                run.termination
            );
        }
    }
    Ok(())
}
