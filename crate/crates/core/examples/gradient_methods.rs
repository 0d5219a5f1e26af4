//! Preconditioned GM and FGM with the theory step `M = beta L` on a quadratic
//! whose spectrum has one outlier.

use polyprec::operators::random::{gaussian_vector, random_spd_with_spectrum, rng_from_seed};
use polyprec::operators::{vector::dot, Cholesky};
use polyprec::problems::make_quadratic;
use polyprec::solvers::{run_fgm, run_gm, theory_constants};
use polyprec::{Preconditioner, SolverConfig, StopRule, SymmetricOperator, TraceMode};

fn main() -> polyprec::Result<()> {
    let mut rng = rng_from_seed(3);
    let mut spectrum = vec![500.0];
    spectrum.extend((0..29).map(|i| 1.0 + i as f64 / 10.0));
    let b = random_spd_with_spectrum(&mut rng, &spectrum);
    let rhs = gaussian_vector(&mut rng, spectrum.len());
    // F* = -(1/2) <b, B^-1 b>
    let f_star = -0.5 * dot(&rhs, &Cholesky::new(&b)?.solve(&rhs));
    let obj = make_quadratic(SymmetricOperator::dense(b)?, rhs)?.with_known_minimum(f_star);
    let op = obj.curvature();
    let x0 = vec![0.0; obj.dim()];
    let stop = StopRule { gap_tol: Some(1e-8), ..StopRule::default() };

    println!("{:<12} {:>6} {:>6} {:>9}", "method", "tau", "iters", "matvecs");
    for tau in 0..3 {
        let prec = Preconditioner::sympoly(op, tau, TraceMode::Exact)?;
        let t = theory_constants(&obj, &prec)?;
        let cfg = SolverConfig::with_m(t.m).rho(t.rho).max_iters(20_000).stop(stop);
        for run in [run_gm(&obj, &prec, &cfg, &x0)?, run_fgm(&obj, &prec, &cfg, &x0)?] {
            println!("{:<12} {:>6} {:>6} {:>9}", run.method, tau, run.iterations(), run.total_matvecs());
        }
    }
    Ok(())
}
