//! Builds `P_tau` for a spectrum with a few large outliers and prints how the
//! condition number of `P_tau B` falls with the degree.

use polyprec::diagnostics::{complementary_sigma, xi_table};
use polyprec::preconditioners::quality_on_spectrum;
use polyprec::{Preconditioner, SymmetricOperator, TraceMode};

fn main() -> polyprec::Result<()> {
    let spectrum = [400.0, 90.0, 20.0, 3.0, 2.0, 1.5, 1.0];
    let op = SymmetricOperator::diagonal(&spectrum);

    let table = xi_table(&spectrum, spectrum.len() - 1)?;
    println!("tau  xi_tau      cond(P B)   measured");
    for row in &table.rows {
        let prec = Preconditioner::sympoly(&op, row.tau, TraceMode::Exact)?;
        let q = quality_on_spectrum(&prec, &spectrum)?;
        println!("{:>3}  {:<10.4e}  {:<10.4}  {:.4}", row.tau, row.xi, row.cond, q.cond);
    }

    // the eigenvalues of P_2 are sigma_2 of the spectrum with lambda_i removed
    let prec = Preconditioner::sympoly(&op, 2, TraceMode::Exact)?;
    let sigma = complementary_sigma(&spectrum, 2)?;
    for (l, s) in spectrum.iter().zip(&sigma) {
        println!("lambda {l:>6}: P_2 = {:.6e}, sigma_2(lambda_-i) = {s:.6e}", prec.eval(*l) * prec.scale());
    }
    println!("{}", table.report.summary_line());
    Ok(())
}
