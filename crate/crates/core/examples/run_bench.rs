//! Runs a config file from `examples/configs` and prints the summary table.
//!
//! `cargo run --release --example run_bench -- huber [OUT_DIR]`

use std::path::{Path, PathBuf};

use polyprec::experiments::{bench, load_config};

fn main() -> polyprec::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "logreg".into());
    let out = args.next().map(PathBuf::from);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(format!("{name}.conf"));
    let configs = load_config(&path)?;
    let outcome = bench(&configs, out.as_deref())?;

    println!("{:<58} {:>7} {:>9} {:>10}  termination", "run", "iters", "to tol", "gap");
    for r in &outcome.runs {
        let to_tol = r.iterations_to_tol.map_or("-".into(), |k| k.to_string());
        println!("{:<58} {:>7} {:>9} {:>10.2e}  {}", r.config.name, r.iterations, to_tol, r.final_gap, r.termination);
    }
    if let Some(v) = &outcome.verify {
        println!("verification (seed {}): {}", v.seed, if v.pass { "pass" } else { "FAIL" });
    }
    if outcome.verification_failed() {
        std::process::exit(2);
    }
    Ok(())
}
