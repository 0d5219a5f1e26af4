//! Batches of experiments run concurrently, plus spectrum tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{run_suite, xi_table, SuiteReport, XiRow};
use crate::error::Result;
use crate::experiments::config::{ExperimentConfig, ProblemSpec, Task};
use crate::experiments::runner::{build_problem, fmt_f64, reference_minimum, run_experiment_with, FStarSource, RunSummary};

#[derive(Debug, Clone, Serialize)]
pub struct BenchOutcome {
    pub runs: Vec<RunSummary>,
    pub verify: Option<SuiteReport>,
}

impl BenchOutcome {
    pub fn verification_failed(&self) -> bool {
        self.verify.as_ref().is_some_and(|s| !s.pass)
    }
}

/// Runs every configuration, sharing one `F*` per distinct problem, and
/// writes per-run files plus `summary.json` into `out` when given.
///
/// Runs only share immutable inputs, so they execute in parallel; output
/// order follows the input order.
pub fn bench(configs: &[ExperimentConfig], out: Option<&Path>) -> Result<BenchOutcome> {
    let mut configs: Vec<ExperimentConfig> = configs.to_vec();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        for c in &mut configs {
            c.out = Some(dir.to_path_buf());
        }
    }
    let verify = match configs.iter().find(|c| c.task == Task::Verify) {
        Some(c) => Some(run_suite(c.seed)?),
        None => None,
    };
    let runs: Vec<&ExperimentConfig> = configs.iter().filter(|c| c.task == Task::Run).collect();

    let mut problems: BTreeMap<String, (ProblemSpec, usize)> = BTreeMap::new();
    for c in &runs {
        let e = problems.entry(c.problem.key()).or_insert((c.problem.clone(), c.max_iters));
        e.1 = e.1.max(c.max_iters);
    }
    let f_stars: BTreeMap<String, (f64, FStarSource)> = problems
        .into_par_iter()
        .map(|(key, (spec, iters))| {
            let obj = build_problem(&spec)?.objective;
            Ok((key, reference_minimum(&obj, iters)?))
        })
        .collect::<Result<_>>()?;
    let summaries = runs
        .par_iter()
        .map(|c| run_experiment_with(c, Some(f_stars[&c.problem.key()])).map(|o| o.summary))
        .collect::<Result<Vec<_>>>()?;
    let outcome = BenchOutcome { runs: summaries, verify };
    if let Some(dir) = out {
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&outcome)?)?;
        if let Some(s) = &outcome.verify {
            fs::write(dir.join("verify.json"), serde_json::to_string_pretty(s)?)?;
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub xi: Vec<XiRow>,
}

/// Eigenvalues of the curvature matrix of a problem and its `xi_tau` table
/// for `tau <= min(tau_max, n - 1)`.
pub fn spectrum_table(spec: &ProblemSpec, tau_max: usize) -> Result<SpectrumTable> {
    let obj = build_problem(spec)?.objective;
    let op = obj.curvature().densified()?;
    let eigenvalues = op.eigenvalues()?.to_vec();
    let n = eigenvalues.len();
    // Numerically zero eigenvalues make xi degenerate; keep the table on the positive part.
    let top = eigenvalues[0];
    let positive: Vec<f64> = eigenvalues.iter().copied().filter(|l| *l > 1e-12 * top).collect();
    let xi = xi_table(&positive, tau_max.min(positive.len().saturating_sub(1)).min(n - 1))?.rows;
    Ok(SpectrumTable { eigenvalues, xi })
}

pub fn write_spectrum(table: &SpectrumTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("eigenvalues.csv"))?;
    w.write_record(["index", "eigenvalue"])?;
    for (i, l) in table.eigenvalues.iter().enumerate() {
        w.write_record([(i + 1).to_string(), fmt_f64(*l)])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("xi.csv"))?;
    w.write_record(["tau", "xi", "cond"])?;
    for r in &table.xi {
        w.write_record([r.tau.to_string(), fmt_f64(r.xi), fmt_f64(r.cond)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::parse_config;

    #[test]
    fn bench_is_deterministic() {
        let text = "name = b\nsynthetic = 30,3,1,10\nmethod = gm adaptive-fgm krylov\nmax_iters = 60\nseed = 3\n";
        let configs = parse_config(text).unwrap();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = bench(&configs, Some(a.path())).unwrap();
        bench(&configs, Some(b.path())).unwrap();
        assert_eq!(ra.runs.len(), 3);
        for c in &configs {
            let strip = |d: &Path| -> Vec<String> {
                fs::read_to_string(d.join(format!("{}.csv", c.name)))
                    .unwrap()
                    .lines()
                    .map(|l| l.rsplit_once(',').unwrap().0.to_string())
                    .collect()
            };
            assert_eq!(strip(a.path()), strip(b.path()));
        }
        assert!(a.path().join("summary.json").exists());
    }

    #[test]
    fn spectrum_of_synthetic_problem() {
        let cfg = &parse_config("synthetic = 100,10,1,6\n").unwrap()[0];
        let t = spectrum_table(&cfg.problem, 3).unwrap();
        assert!((t.eigenvalues[0] - 100.0).abs() < 1e-9 && (t.eigenvalues[5] - 1.0).abs() < 1e-9);
        assert_eq!(t.xi.len(), 4);
        let d = tempfile::tempdir().unwrap();
        write_spectrum(&t, d.path()).unwrap();
        let text = fs::read_to_string(d.path().join("xi.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,xi,cond"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(first[..2], [0.0, 1.0]);
        assert!((first[2] - 100.0).abs() < 1e-7);
    }
}
