//! Preconditioned gradient methods: fixed-step and adaptive GM and FGM.
//!
//! All runs share [`SolverConfig`] and report a [`RunResult`] whose
//! per-iteration telemetry counts curvature matvecs, function and gradient
//! evaluations and line-search trials for that run alone.

mod fgm;
mod gm;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use fgm::{fgm_step, run_adaptive_fgm, run_fgm, solve_coefficient_equation, FgmState, FgmStep};
pub use gm::{
    initial_guess_m, quadratic_growth_predicate, run_adaptive_gm, run_gm, GuessFlag, InitialGuess,
};

use crate::error::{Error, Result};
use crate::preconditioners::Preconditioner;
use crate::problems::CompositeObjective;

/// When to stop; the first satisfied criterion wins.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once `F(x_k) - F* <= gap_tol`.
    pub gap_tol: Option<f64>,
    /// `F*`; falls back to the objective's known minimum.
    pub f_star: Option<f64>,
    /// Stop once the gradient-map norm is at most this.
    pub grad_map_tol: Option<f64>,
    /// Stop once the best value has stopped improving.
    pub stall: Option<Stall>,
}

/// No improvement of the best `F` by more than `rel_tol * max(1, |F|)` over
/// the last `window` iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stall {
    pub window: usize,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Step constant `M` for fixed-step runs, initial guess for adaptive ones.
    pub m: f64,
    /// Strong-convexity parameter of FGM, `alpha mu` in theory.
    pub rho: f64,
    pub max_iters: usize,
    pub stop: StopRule,
    pub max_doublings: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { m: 1.0, rho: 0.0, max_iters: 1000, stop: StopRule::default(), max_doublings: 60 }
    }
}

impl SolverConfig {
    pub fn with_m(m: f64) -> Self {
        Self { m, ..Self::default() }
    }

    pub fn max_iters(mut self, k: usize) -> Self {
        self.max_iters = k;
        self
    }

    pub fn rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetGap,
    GradientMap,
    Stalled,
    MaxIters,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::TargetGap => "target_gap",
            Termination::GradientMap => "gradient_map",
            Termination::Stalled => "stalled",
            Termination::MaxIters => "max_iters",
        })
    }
}

/// Telemetry after iteration `k` (`k = 0` is the starting point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub fval: f64,
    pub gap: Option<f64>,
    /// `||grad f||_P`-type stationarity measure of the step that produced `x_k`.
    pub grad_map: f64,
    pub matvecs: u64,
    pub f_evals: u64,
    pub grad_evals: u64,
    pub ls_trials: u32,
    pub m_k: f64,
    pub a_k: Option<f64>,
    pub eff_degree: Option<usize>,
    pub time_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    pub method: String,
    pub preconditioner: String,
    pub records: Vec<IterationRecord>,
    pub x: Vec<f64>,
    pub termination: Termination,
    pub flags: Vec<String>,
}

impl RunResult {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.fval)
    }

    pub fn total_matvecs(&self) -> u64 {
        self.records.last().map_or(0, |r| r.matvecs)
    }

    /// First `k` with `F(x_k) - F* <= tol`.
    pub fn iterations_to_gap(&self, tol: f64) -> Option<usize> {
        self.records.iter().find(|r| r.gap.is_some_and(|g| g <= tol)).map(|r| r.k)
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.fval).collect()
    }
}

/// Running counters shared by the method implementations.
pub(crate) struct Telemetry {
    start: Instant,
    pub matvecs: u64,
    pub f_evals: u64,
    pub grad_evals: u64,
    f_star: Option<f64>,
    stop: StopRule,
    /// Best value so far and the iteration at which it last improved enough.
    best: (f64, usize),
    pub records: Vec<IterationRecord>,
}

pub(crate) struct Sample {
    pub fval: f64,
    pub grad_map: f64,
    pub ls_trials: u32,
    pub m_k: f64,
    pub a_k: Option<f64>,
    pub eff_degree: Option<usize>,
}

impl Telemetry {
    pub fn new(obj: &CompositeObjective, stop: StopRule) -> Self {
        Self {
            start: Instant::now(),
            matvecs: 0,
            f_evals: 0,
            grad_evals: 0,
            f_star: stop.f_star.or(obj.known_minimum()),
            stop,
            best: (f64::INFINITY, 0),
            records: Vec::new(),
        }
    }

    /// Appends a record and reports whether a stopping criterion fired.
    pub fn record(&mut self, k: usize, s: Sample) -> Result<Option<Termination>> {
        if !s.fval.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        let gap = self.f_star.map(|f| s.fval - f);
        self.records.push(IterationRecord {
            k,
            fval: s.fval,
            gap,
            grad_map: s.grad_map,
            matvecs: self.matvecs,
            f_evals: self.f_evals,
            grad_evals: self.grad_evals,
            ls_trials: s.ls_trials,
            m_k: s.m_k,
            a_k: s.a_k,
            eff_degree: s.eff_degree,
            time_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        if let (Some(tol), Some(g)) = (self.stop.gap_tol, gap) {
            if g <= tol {
                return Ok(Some(Termination::TargetGap));
            }
        }
        if let Some(tol) = self.stop.grad_map_tol {
            if k > 0 && s.grad_map <= tol {
                return Ok(Some(Termination::GradientMap));
            }
        }
        if let Some(st) = self.stop.stall {
            let (best, since) = self.best;
            if s.fval < best - st.rel_tol * best.abs().max(1.0) || !best.is_finite() {
                self.best = (s.fval, k);
            } else {
                self.best.0 = best.min(s.fval);
                if k - since >= st.window {
                    return Ok(Some(Termination::Stalled));
                }
            }
        }
        Ok(None)
    }

    pub fn finish(self, method: &str, prec: &Preconditioner, x: Vec<f64>, termination: Termination, flags: Vec<String>) -> RunResult {
        RunResult {
            method: method.to_string(),
            preconditioner: prec.descriptor().to_string(),
            records: self.records,
            x,
            termination,
            flags,
        }
    }
}

pub(crate) fn check_start(obj: &CompositeObjective, x0: &[f64]) -> Result<()> {
    obj.curvature().check_dim(x0.len())
}

/// `beta L` and `alpha mu` from the exact spectrum of a dense curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub alpha: f64,
    pub beta: f64,
    pub l: f64,
    pub mu: f64,
    pub m: f64,
    pub rho: f64,
}

pub fn theory_constants(obj: &CompositeObjective, prec: &Preconditioner) -> Result<TheoryConstants> {
    let q = prec.quality(obj.curvature())?;
    let (l, mu) = (obj.lipschitz(), obj.strong_convexity());
    Ok(TheoryConstants { alpha: q.alpha, beta: q.beta, l, mu, m: q.beta * l, rho: q.alpha * mu })
}

/// The methods selectable from configuration text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gm,
    Fgm,
    AdaptiveGm,
    AdaptiveFgm,
    Krylov,
}

impl Method {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, Method::AdaptiveGm | Method::AdaptiveFgm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gm => "gm",
            Method::Fgm => "fgm",
            Method::AdaptiveGm => "adaptive-gm",
            Method::AdaptiveFgm => "adaptive-fgm",
            Method::Krylov => "krylov",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gm" => Ok(Method::Gm),
            "fgm" => Ok(Method::Fgm),
            "adaptive-gm" | "agm" => Ok(Method::AdaptiveGm),
            "adaptive-fgm" | "afgm" => Ok(Method::AdaptiveFgm),
            "krylov" => Ok(Method::Krylov),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Gm, Method::Fgm, Method::AdaptiveGm, Method::AdaptiveFgm, Method::Krylov] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("sgd".parse::<Method>().is_err());
    }
}
