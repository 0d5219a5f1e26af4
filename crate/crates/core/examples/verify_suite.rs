//! Runs the deterministic verification suite and prints one line per check.

fn main() -> polyprec::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let report = polyprec::diagnostics::run_suite(seed)?;
    for c in &report.checks {
        println!("{}", c.summary_line());
    }
    println!("seed {seed}: {}", if report.pass { "all hard checks passed" } else { "FAILED" });
    if !report.pass {
        std::process::exit(2);
    }
    Ok(())
}
