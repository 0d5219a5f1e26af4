//! Logistic regression on the bundled libsvm fixture, comparing GM and FGM
//! across preconditioner degrees with the theory step.

use std::path::Path;

use polyprec::experiments::{build_problem, reference_minimum, run_method, ExperimentConfig, ProblemSource};
use polyprec::problems::Loss;
use polyprec::solvers::Method;
use polyprec::{Descriptor, Preconditioner, StopRule};

fn main() -> polyprec::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/categorical.libsvm");
    let mut spec = ExperimentConfig::default().problem;
    spec.source = ProblemSource::Dataset { path };
    spec.loss = Loss::Logistic;
    spec.standardize = false;
    let obj = build_problem(&spec)?.objective;
    let (f_star, source) = reference_minimum(&obj, 5000)?;
    println!("n = {}, F* = {f_star:.12e} ({source:?})", obj.dim());

    let x0 = vec![0.0; obj.dim()];
    let stop = StopRule { gap_tol: Some(1e-6), f_star: Some(f_star), ..StopRule::default() };
    for method in [Method::Gm, Method::Fgm] {
        for tau in 0..=2 {
            let prec = Preconditioner::from_descriptor(&Descriptor::sympoly(tau), obj.curvature())?;
            let run = run_method(&obj, method, &prec, tau, 5000, stop, None, &x0)?;
            println!(
                "{method:<4} P_{tau}: {:>5} iters, {:>6} matvecs, gap {:.2e}",
                run.iterations(),
                run.total_matvecs(),
                run.final_value() - f_star
            );
        }
    }
    Ok(())
}
