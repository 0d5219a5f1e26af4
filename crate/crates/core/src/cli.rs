//! The `polyprec` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::run_suite;
use crate::error::{Error, Result};
use crate::experiments::{
    bench, load_config, plotdata, run_experiment, spectrum_table, write_run_csv_to, write_spectrum, ExperimentConfig,
    ProblemSource,
};
use crate::preconditioners::Descriptor;
use crate::problems::Loss;
use crate::solvers::Method;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "polyprec", version, about = "Polynomial-preconditioned first-order methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one method on one problem.
    Solve(SolveArgs),
    /// Run every configuration of a key = value file.
    Bench {
        config: PathBuf,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Overrides the seed of every configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Eigenvalues of the curvature matrix and the xi table.
    Spectrum {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Largest degree in the xi table.
        #[arg(long, default_value_t = 10)]
        tau: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the diagnostics suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge run CSVs (files or directories) into long format.
    Plotdata {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// libsvm file.
    #[arg(long, conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// Gapped synthetic spectrum `lambda1,lambda2,tail,n`.
    #[arg(long)]
    synthetic: Option<String>,
    /// `huber:MU` or `logistic`.
    #[arg(long)]
    loss: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep dataset columns unscaled.
    #[arg(long)]
    no_standardize: bool,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "gm")]
    method: String,
    /// Preconditioner descriptor; `sympoly`, `chebyshev` and `cutting` take their degree from `--tau`.
    #[arg(long)]
    precond: Option<String>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long)]
    m0: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn apply_problem(cfg: &mut ExperimentConfig, p: &ProblemArgs) -> Result<()> {
    cfg.seed = p.seed;
    cfg.problem.seed = p.seed;
    cfg.problem.standardize = !p.no_standardize;
    cfg.problem.l2 = p.l2;
    match (&p.dataset, &p.synthetic) {
        (Some(path), _) => {
            cfg.problem.source = ProblemSource::Dataset { path: path.clone() };
            cfg.problem.loss = Loss::Logistic;
        }
        (None, Some(s)) => cfg.problem.source = ProblemSource::parse_synthetic(s)?,
        (None, None) => return Err(usage("one of --dataset or --synthetic is required")),
    }
    if let Some(l) = &p.loss {
        cfg.problem.loss = l.parse()?;
    }
    Ok(())
}

fn solve_config(a: &SolveArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    apply_problem(&mut cfg, &a.problem)?;
    cfg.method = a.method.parse::<Method>()?;
    cfg.precond = match (&a.precond, a.tau) {
        (Some(p), Some(t)) if matches!(p.as_str(), "sympoly" | "chebyshev" | "cutting") => {
            Some(format!("{p}:{t}").parse::<Descriptor>()?)
        }
        (Some(p), _) => Some(p.parse::<Descriptor>()?),
        (None, _) => None,
    };
    if let Some(t) = a.tau {
        cfg.tau = t;
    }
    cfg.max_iters = a.max_iters;
    cfg.tol = a.tol;
    cfg.m0 = a.m0;
    cfg.out = a.out.clone();
    cfg.name = crate::experiments::sanitize(&format!("{}-{}", cfg.method, cfg.precond_label()));
    cfg.validate()?;
    Ok(cfg)
}

/// Whether a CSV's header names an `iter` column, i.e. it is a run CSV.
fn is_run_csv(path: &std::path::Path) -> bool {
    csv::Reader::from_path(path).and_then(|mut r| r.headers().map(|h| h.iter().any(|c| c == "iter"))).unwrap_or(false)
}

/// Explicit files are taken as given; directories contribute their run CSVs.
fn csv_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv") && f.file_name().is_some_and(|n| n != "plotdata.csv") && is_run_csv(f))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(usage("no CSV inputs found"));
    }
    Ok(files)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(out, "{text}")?;
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => {
            let cfg = solve_config(&a)?;
            let o = run_experiment(&cfg)?;
            if cfg.out.is_none() {
                write_run_csv_to(&o.run, &mut *out)?;
            } else {
                emit(out, &serde_json::to_string_pretty(&o.summary)?)?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench { config, out: dir, seed } => {
            let mut configs = load_config(&config)?;
            if let Some(s) = seed {
                for c in &mut configs {
                    c.seed = s;
                    c.problem.seed = s;
                }
            }
            let o = bench(&configs, Some(&dir))?;
            for r in &o.runs {
                let to_tol = r.iterations_to_tol.map_or("-".to_string(), |k| k.to_string());
                emit(out, &format!("{}\t{}\titers_to_tol={}\tmatvecs={}", r.config.name, r.termination, to_tol, r.total_matvecs))?;
            }
            if let Some(s) = &o.verify {
                for c in &s.checks {
                    emit(out, &c.summary_line())?;
                }
            }
            Ok(if o.verification_failed() { EXIT_VERIFY } else { EXIT_OK })
        }
        Command::Spectrum { problem, tau, out: dir } => {
            let mut cfg = ExperimentConfig::default();
            apply_problem(&mut cfg, &problem)?;
            let t = spectrum_table(&cfg.problem, tau)?;
            match dir {
                Some(d) => {
                    write_spectrum(&t, &d)?;
                    emit(out, &format!("wrote {} eigenvalues and {} xi rows to {}", t.eigenvalues.len(), t.xi.len(), d.display()))?;
                }
                None => {
                    emit(out, "index,eigenvalue")?;
                    for (i, l) in t.eigenvalues.iter().enumerate() {
                        emit(out, &format!("{},{}", i + 1, crate::experiments::fmt_f64(*l)))?;
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify { seed, out: dir } => {
            let s = run_suite(seed)?;
            let json = serde_json::to_string_pretty(&s)?;
            if let Some(d) = dir {
                std::fs::create_dir_all(&d)?;
                std::fs::write(d.join("verify.json"), &json)?;
            }
            emit(out, &json)?;
            Ok(if s.pass { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Plotdata { inputs, out: dir } => {
            let files = csv_inputs(&inputs)?;
            std::fs::create_dir_all(&dir)?;
            let target = dir.join("plotdata.csv");
            let n = plotdata(&files, &target)?;
            emit(out, &format!("wrote {n} rows from {} runs to {}", files.len(), target.display()))?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs, writing results to `out`
/// and diagnostics to `err`. Returns the process exit code.
pub fn main_with(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn main(args: Vec<String>) -> i32 {
    main_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
