//! GM iterations on Huber regression as one eigenvalue moves away from the
//! rest. `P_0` pays for the outlier; `P_1` removes it.

use polyprec::experiments::{run_experiment_with, ExperimentConfig, FStarSource, ProblemSource};
use polyprec::problems::Loss;
use polyprec::Descriptor;

fn iterations(lambda1: f64, lambda2: f64, tau: usize) -> polyprec::Result<Option<usize>> {
    let mut c = ExperimentConfig::default();
    c.problem.source = ProblemSource::Synthetic { lambda1, lambda2, tail: 1.0, n: 100 };
    c.problem.loss = Loss::Huber { mu: 0.1 };
    c.precond = Some(Descriptor::sympoly(tau));
    c.max_iters = 20_000;
    c.tol = 1e-6;
    // the planted point has value zero
    Ok(run_experiment_with(&c, Some((0.0, FStarSource::Known)))?.summary.iterations_to_tol)
}

fn show(k: Option<usize>) -> String {
    k.map_or("-".into(), |k| k.to_string())
}

fn main() -> polyprec::Result<()> {
    println!("lambda1  lambda2  P_0     P_1     P_2");
    for (l1, l2) in [(10.0, 1.0), (100.0, 1.0), (800.0, 1.0), (1000.0, 10.0), (1000.0, 100.0)] {
        let ks: Vec<String> = (0..3).map(|tau| iterations(l1, l2, tau).map(show)).collect::<polyprec::Result<_>>()?;
        println!("{l1:<7}  {l2:<7}  {:<6}  {:<6}  {}", ks[0], ks[1], ks[2]);
    }
    Ok(())
}
