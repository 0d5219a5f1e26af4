//! Experiment configuration and the flat `key = value` file format.
//!
//! A value may list several whitespace-separated alternatives; a file then
//! stands for the cartesian product of all its lists, in key order of first
//! appearance.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::synthetic::Rotation;
use crate::preconditioners::Descriptor;
use crate::problems::Loss;
use crate::solvers::Method;

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSource {
    /// Spectrum `(lambda_1, lambda_2, tail, .., tail)` of length `n`.
    Synthetic { lambda1: f64, lambda2: f64, tail: f64, n: usize },
    Dataset { path: PathBuf },
}

impl ProblemSource {
    /// Parses `λ1,λ2,tail,n`.
    pub fn parse_synthetic(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("expected lambda1,lambda2,tail,n, got '{s}'"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [l1, l2, tail, n] = parts.as_slice() else { return Err(bad()) };
        let f = |t: &str| t.parse::<f64>().map_err(|_| bad());
        Ok(ProblemSource::Synthetic { lambda1: f(l1)?, lambda2: f(l2)?, tail: f(tail)?, n: n.parse().map_err(|_| bad())? })
    }
}

impl fmt::Display for ProblemSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemSource::Synthetic { lambda1, lambda2, tail, n } => write!(f, "synthetic:{lambda1},{lambda2},{tail},{n}"),
            ProblemSource::Dataset { path } => write!(f, "dataset:{}", path.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub source: ProblemSource,
    #[serde(serialize_with = "as_text")]
    pub loss: Loss,
    /// Scale dataset columns to unit norm.
    pub standardize: bool,
    /// Weight of `(sigma/2) ||x||^2`.
    pub l2: f64,
    pub rotation: Rotation,
    /// Seed of the synthetic generator.
    pub seed: u64,
}

impl ProblemSpec {
    /// Identity of the problem instance, shared by runs that can reuse one `F*`.
    pub fn key(&self) -> String {
        format!("{}|{}|{}|{}|{:?}|{}", self.source, self.loss, self.standardize, self.l2, self.rotation, self.seed)
    }
}

fn as_text<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Run,
    /// The diagnostics suite.
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: Task,
    pub problem: ProblemSpec,
    pub method: Method,
    /// `None` means the identity; Krylov runs must leave it unset.
    pub precond: Option<Descriptor>,
    /// Krylov subspace degree.
    pub tau: usize,
    pub max_iters: usize,
    /// Target gap `F(x_k) - F*`.
    pub tol: f64,
    /// Initial `M` for adaptive methods; estimated from one step when unset.
    pub m0: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            task: Task::Run,
            problem: ProblemSpec {
                source: ProblemSource::Synthetic { lambda1: 10.0, lambda2: 1.0, tail: 1.0, n: 100 },
                loss: Loss::Huber { mu: 0.1 },
                standardize: true,
                l2: 0.0,
                rotation: Rotation::RandomOrthogonal,
                seed: 0,
            },
            method: Method::Gm,
            precond: None,
            tau: 1,
            max_iters: 1000,
            tol: 1e-6,
            m0: None,
            seed: 0,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Krylov && self.precond.is_some() {
            return Err(Error::Config("krylov builds its own polynomial and takes no preconditioner".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config(format!("tolerance must be nonnegative, got {}", self.tol)));
        }
        if self.m0.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::Config("m0 must be positive".into()));
        }
        if self.problem.l2 < 0.0 {
            return Err(Error::Config("l2 must be nonnegative".into()));
        }
        if let ProblemSource::Synthetic { n, .. } = self.problem.source {
            if n < 2 {
                return Err(Error::Config("synthetic problems need n >= 2".into()));
            }
        }
        Ok(())
    }

    pub fn precond_label(&self) -> String {
        match (&self.precond, self.method) {
            (_, Method::Krylov) => format!("krylov:{}", self.tau),
            (Some(d), _) => d.to_string(),
            (None, _) => Descriptor::Identity.to_string(),
        }
    }

    /// Sets one key from text.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Config(format!("{key}: expected a number, got '{v}'")));
        let int = |v: &str| v.parse::<u64>().map_err(|_| Error::Config(format!("{key}: expected an integer, got '{v}'")));
        let boolean = |v: &str| match v {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(Error::Config(format!("{key}: expected a boolean, got '{v}'"))),
        };
        match key {
            "name" => self.name = value.to_string(),
            "task" => {
                self.task = match value {
                    "run" => Task::Run,
                    "verify" => Task::Verify,
                    _ => return Err(Error::Config(format!("unknown task '{value}'"))),
                }
            }
            "synthetic" => self.problem.source = ProblemSource::parse_synthetic(value)?,
            "dataset" => self.problem.source = ProblemSource::Dataset { path: PathBuf::from(value) },
            "loss" => self.problem.loss = Loss::from_str(value)?,
            "standardize" => self.problem.standardize = boolean(value)?,
            "l2" => self.problem.l2 = num(value)?,
            "rotation" => {
                self.problem.rotation = match value {
                    "identity" => Rotation::Identity,
                    "random" | "random-orthogonal" => Rotation::RandomOrthogonal,
                    _ => return Err(Error::Config(format!("unknown rotation '{value}'"))),
                }
            }
            "problem_seed" => self.problem.seed = int(value)?,
            "method" => self.method = Method::from_str(value)?,
            "precond" => self.precond = Some(Descriptor::from_str(value)?),
            "tau" => self.tau = int(value)? as usize,
            "max_iters" => self.max_iters = int(value)? as usize,
            "tol" => self.tol = num(value)?,
            "m0" => self.m0 = Some(num(value)?),
            "seed" => {
                self.seed = int(value)?;
                self.problem.seed = self.seed;
            }
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

/// Parses a config file body into the expanded list of runs.
///
/// A line holding only `---` starts a new section; sections expand
/// independently and their runs are concatenated.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut runs = Vec::new();
    let mut start = 0;
    for (i, line) in lines.iter().enumerate() {
        if line.trim() == "---" {
            runs.extend(parse_section(&lines[start..i], start)?);
            start = i + 1;
        }
    }
    runs.extend(parse_section(&lines[start..], start)?);
    Ok(runs)
}

fn parse_section(lines: &[&str], offset: usize) -> Result<Vec<ExperimentConfig>> {
    let mut keys: Vec<(String, Vec<String>, usize)> = Vec::new();
    for (i, line) in lines.iter().enumerate().map(|(i, l)| (i + offset, l)) {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected key = value, got '{content}'") })?;
        let k = k.trim().to_string();
        let values: Vec<String> = v.split_whitespace().map(String::from).collect();
        if values.is_empty() {
            return Err(Error::Parse { line: i + 1, message: format!("key '{k}' has no value") });
        }
        if keys.iter().any(|(other, _, _)| *other == k) {
            return Err(Error::Parse { line: i + 1, message: format!("duplicate key '{k}'") });
        }
        keys.push((k, values, i + 1));
    }
    // `seed` resets the problem seed too, so it is applied before `problem_seed`.
    keys.sort_by_key(|(k, _, _)| match k.as_str() {
        "seed" => 0,
        "problem_seed" => 2,
        _ => 1,
    });
    let mut configs = vec![(ExperimentConfig::default(), BTreeMap::new())];
    for (k, values, line) in &keys {
        let mut next = Vec::with_capacity(configs.len() * values.len());
        for (cfg, varied) in &configs {
            for v in values {
                let mut c: ExperimentConfig = cfg.clone();
                c.set(k, v).map_err(|e| Error::Parse { line: *line, message: e.to_string() })?;
                let mut varied: BTreeMap<String, String> = varied.clone();
                if values.len() > 1 {
                    varied.insert(k.clone(), v.clone());
                }
                next.push((c, varied));
            }
        }
        configs = next;
    }
    let many = configs.len() > 1;
    configs
        .into_iter()
        .map(|(mut c, varied)| {
            if many {
                let suffix: Vec<String> = varied.iter().map(|(k, v)| format!("{k}={v}")).collect();
                c.name = sanitize(&format!("{}-{}", c.name, suffix.join("-")));
            }
            c.validate().map(|_| c)
        })
        .collect()
}

/// Reads a config file; relative dataset paths resolve against its directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<Vec<ExperimentConfig>> {
    let path = path.as_ref();
    let mut configs = parse_config(&std::fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for c in &mut configs {
        if let ProblemSource::Dataset { path: p } = &mut c.problem.source {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(configs)
}

/// File-name safe version of a run name.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '=') { c } else { '_' })
        .collect()
}
