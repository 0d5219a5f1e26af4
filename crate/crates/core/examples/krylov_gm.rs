//! Krylov GM chooses the best degree-`tau` polynomial step every iteration,
//! so it needs neither traces nor a spectral bound.

use polyprec::diagnostics::krylov_dominance;
use polyprec::experiments::{synth_regression, SyntheticSpectrumSpec};
use polyprec::krylov::run_krylov_gm;
use polyprec::problems::Loss;
use polyprec::{SolverConfig, StopRule};

fn main() -> polyprec::Result<()> {
    let spec = SyntheticSpectrumSpec::pattern(1000.0, 100.0, 1.0, 80, 5)?;
    let obj = synth_regression(&spec, Loss::Huber { mu: 0.1 })?.objective;
    let x0 = vec![0.0; obj.dim()];
    let cfg = SolverConfig::default().max_iters(20_000).stop(StopRule { gap_tol: Some(1e-8), ..StopRule::default() });

    for tau in 0..=4 {
        let run = run_krylov_gm(&obj, tau, &cfg, &x0)?;
        let degrees: Vec<usize> = run.records.iter().filter_map(|r| r.eff_degree).collect();
        let low = degrees.iter().filter(|d| **d < tau).count();
        println!(
            "tau {tau}: {:>5} iters, {:>6} matvecs, {low} steps with a reduced degree",
            run.iterations(),
            run.total_matvecs()
        );
    }

    // one step against the P_2 and Chebyshev steps from the same point
    println!("{}", krylov_dominance(&obj, &x0, 2)?.summary_line());
    Ok(())
}
