//! Chebyshev and eigenvalue-cutting polynomials against their `gamma` bounds.
//! Cutting knows the top eigenvalues; Chebyshev only the extremes.

use polyprec::diagnostics::{predicted_bounds, verify_polynomial_bounds};
use polyprec::preconditioners::{chebyshev_degree, gamma_of_fn, CuttingPolynomial};
use polyprec::Preconditioner;

fn main() -> polyprec::Result<()> {
    let spectrum = [900.0, 300.0, 80.0, 4.0, 3.0, 2.5, 2.0, 1.0];
    let (l1, ln) = (spectrum[0], spectrum[spectrum.len() - 1]);

    println!("tau  cutting gamma  bound      chebyshev gamma  bound");
    for tau in 0..spectrum.len() {
        let (cut_cond, cheb_bound) = predicted_bounds(&spectrum, tau)?;
        let cut = CuttingPolynomial::for_spectrum(&spectrum, tau)?;
        let cheb = Preconditioner::chebyshev_on(l1, ln, tau)?;
        let g_cut = gamma_of_fn(|s| cut.eval(s), spectrum.iter().copied());
        let g_cheb = gamma_of_fn(|s| cheb.eval(s), spectrum.iter().copied());
        println!(
            "{tau:>3}  {g_cut:<13.4e}  {:<9.4e}  {g_cheb:<15.4e}  {cheb_bound:.4e}",
            (cut_cond - 1.0) / (cut_cond + 1.0)
        );
        let r = verify_polynomial_bounds(&spectrum, tau, 1e-9)?;
        assert!(r.pass, "{}", r.summary_line());
    }
    println!("chebyshev degree for gamma <= 1e-2 on [{ln}, {l1}]: {}", chebyshev_degree(l1, ln, 1e-2));
    Ok(())
}
