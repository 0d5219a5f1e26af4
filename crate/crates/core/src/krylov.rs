//! Gradient method with the best polynomial step in a Krylov subspace.
//!
//! Each iteration minimizes the model `<g, h> + (L/2) ||h||_B^2` over
//! `h = -(a_0 g + a_1 B g + ... + a_tau B^tau g)`, which reduces to the small
//! Gram system `A a = g_tau`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::vector::dot;
use crate::operators::DenseMatrix;
use crate::preconditioners::Preconditioner;
use crate::problems::CompositeObjective;
use crate::solvers::{check_start, RunResult, Sample, SolverConfig, Telemetry, Termination};

/// Relative pivot below which the Krylov basis is treated as degenerate.
pub const PIVOT_TOL: f64 = 1e-12;

/// `A[i][j] = L <w_i, w_{j+1}>`, `g[i] = <w_0, w_i>` with `w_m = B^m grad f(x)`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    pub a: DenseMatrix,
    pub g: Vec<f64>,
    /// `w_0 .. w_{tau+1}`.
    pub basis: Vec<Vec<f64>>,
    pub f_x: f64,
    pub matvecs: u64,
}

impl GramSystem {
    pub fn tau(&self) -> usize {
        self.g.len() - 1
    }

    pub fn gradient(&self) -> &[f64] {
        &self.basis[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrylovStepInfo {
    pub coefficients: Vec<f64>,
    pub effective_degree: usize,
    /// `f(x) - min model = (1/2) <a, g_tau>`.
    pub model_decrease: f64,
}

/// Gradient at `x` and its Krylov powers; uses `tau + 1` matvecs.
pub fn build_gram(obj: &CompositeObjective, x: &[f64], tau: usize) -> Result<GramSystem> {
    obj.curvature().check_dim(x.len())?;
    let (f_x, g) = obj.value_and_gradient(x);
    let op = obj.curvature();
    let n = x.len();
    let mut basis = Vec::with_capacity(tau + 2);
    basis.push(g);
    for m in 0..=tau {
        let mut next = vec![0.0; n];
        op.apply_into(&basis[m], &mut next);
        basis.push(next);
    }
    let l = obj.lipschitz();
    let mut a = DenseMatrix::zeros(tau + 1, tau + 1);
    for i in 0..=tau {
        for j in i..=tau {
            let v = l * dot(&basis[i], &basis[j + 1]);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let gv = (0..=tau).map(|i| dot(&basis[0], &basis[i])).collect();
    Ok(GramSystem { a, g: gv, basis, f_x, matvecs: tau as u64 + 1 })
}

/// Solves `A a = g` by Cholesky on the unit-diagonal scaling of `A`,
/// truncating at the first pivot below [`PIVOT_TOL`] and zero-padding.
pub fn solve_gram(sys: &GramSystem) -> KrylovStepInfo {
    let size = sys.g.len();
    let diag: Vec<f64> = (0..size).map(|i| sys.a.get(i, i)).collect();
    let mut k = 0;
    while k < size && diag[k] > 0.0 && diag[k].is_finite() {
        k += 1;
    }
    let d: Vec<f64> = diag[..k].iter().map(|x| 1.0 / x.sqrt()).collect();
    // Leading-block Cholesky of D A D, stopping at a degenerate pivot.
    let mut l = vec![vec![0.0; k]; k];
    let mut accepted = 0;
    'outer: for j in 0..k {
        let mut p = sys.a.get(j, j) * d[j] * d[j];
        for m in 0..j {
            p -= l[j][m] * l[j][m];
        }
        if !(p > PIVOT_TOL) {
            break 'outer;
        }
        let pj = p.sqrt();
        l[j][j] = pj;
        for i in (j + 1)..k {
            let mut s = sys.a.get(i, j) * d[i] * d[j];
            for m in 0..j {
                s -= l[i][m] * l[j][m];
            }
            l[i][j] = s / pj;
        }
        accepted = j + 1;
    }
    let mut coefficients = vec![0.0; size];
    if accepted > 0 {
        let r = accepted;
        let mut z: Vec<f64> = (0..r).map(|i| sys.g[i] * d[i]).collect();
        for i in 0..r {
            for m in 0..i {
                z[i] -= l[i][m] * z[m];
            }
            z[i] /= l[i][i];
        }
        for i in (0..r).rev() {
            for m in (i + 1)..r {
                z[i] -= l[m][i] * z[m];
            }
            z[i] /= l[i][i];
        }
        for i in 0..r {
            coefficients[i] = z[i] * d[i];
        }
    }
    let model_decrease = 0.5 * dot(&coefficients, &sys.g);
    KrylovStepInfo { coefficients, effective_degree: accepted.saturating_sub(1), model_decrease }
}

/// `x - sum_i a_i w_i` from the cached basis; no matvecs.
pub fn krylov_step(x: &[f64], info: &KrylovStepInfo, sys: &GramSystem) -> Vec<f64> {
    let mut y = x.to_vec();
    for (a, w) in info.coefficients.iter().zip(&sys.basis) {
        if *a != 0.0 {
            y.iter_mut().zip(w).for_each(|(yi, wi)| *yi -= a * wi);
        }
    }
    y
}

/// `<g, h> + (L/2) <Bh, h>`, the upper model of `f(x + h) - f(x)`.
pub fn model_value(obj: &CompositeObjective, g: &[f64], h: &[f64]) -> Result<f64> {
    Ok(dot(g, h) + 0.5 * obj.lipschitz() * obj.curvature().b_norm_sq(h)?)
}

/// Krylov-preconditioned gradient method of degree `tau`.
pub fn run_krylov_gm(obj: &CompositeObjective, tau: usize, config: &SolverConfig, x0: &[f64]) -> Result<RunResult> {
    check_start(obj, x0)?;
    if !obj.psi().is_zero() {
        return Err(Error::CompositeNotSupported);
    }
    let mut t = Telemetry::new(obj, config.stop);
    let mut x = x0.to_vec();
    t.f_evals += 1;
    let f0 = obj.value(&x);
    let l = obj.lipschitz();
    let mut end = t.record(
        0,
        Sample { fval: f0, grad_map: f64::NAN, ls_trials: 0, m_k: l, a_k: None, eff_degree: None },
    )?;
    for k in 1..=config.max_iters {
        if end.is_some() {
            break;
        }
        let sys = build_gram(obj, &x, tau)?;
        t.matvecs += sys.matvecs;
        t.f_evals += 1;
        t.grad_evals += 1;
        let info = solve_gram(&sys);
        x = krylov_step(&x, &info, &sys);
        let f = obj.value(&x);
        t.f_evals += 1;
        end = t.record(
            k,
            Sample {
                fval: f,
                grad_map: (2.0 * l * info.model_decrease.max(0.0)).sqrt(),
                ls_trials: 1,
                m_k: l,
                a_k: None,
                eff_degree: Some(info.effective_degree),
            },
        )?;
    }
    let label = Preconditioner::identity();
    let mut result = t.finish("krylov", &label, x, end.unwrap_or(Termination::MaxIters), vec![]);
    result.preconditioner = format!("krylov:{tau}");
    Ok(result)
}
