//! Spectral identities of the symmetric polynomial family.

use serde_json::json;

use crate::diagnostics::CheckReport;
use crate::error::{Error, Result};
use crate::operators::{elementary_symmetric_with_scale, jacobi_eigen, Cholesky, DenseMatrix, SymmetricOperator};
use crate::preconditioners::{Preconditioner, TraceMode};

/// `sigma_tau(lambda without lambda_i)` for every `i`, in raw units.
pub fn complementary_sigma(spectrum: &[f64], tau: usize) -> Result<Vec<f64>> {
    let scale = spectrum.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    (0..spectrum.len())
        .map(|i| {
            let rest: Vec<f64> = spectrum.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let e = elementary_symmetric_with_scale(&rest, tau, Some(scale))?;
            Ok(e.value(tau))
        })
        .collect()
}

/// Dense matrix of an operator-valued map, one column per unit vector.
pub fn dense_of(n: usize, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<DenseMatrix> {
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(f(&e)?);
    }
    Ok(DenseMatrix::from_columns_fn(n, n, |j| cols[j].clone()))
}

/// Unnormalized `P_tau` of `b` as a dense matrix, through the production
/// coefficient recursion and Horner application.
pub fn sympoly_dense(b: &DenseMatrix, tau: usize) -> Result<DenseMatrix> {
    let op = SymmetricOperator::dense(b.clone())?;
    let p = Preconditioner::sympoly(&op, tau, TraceMode::Exact)?;
    let s = p.scale();
    dense_of(b.rows(), |e| Ok(p.apply(&op, e)?.into_iter().map(|x| x * s).collect()))
}

/// Checks `P_tau q_i = sigma_tau(lambda_{-i}) q_i` for every eigenpair of `b`.
///
/// Deviations are normwise: `||P q_i - sigma_i q_i|| / max_j sigma_j`.
pub fn verify_eigenpairs(b: &DenseMatrix, tau: usize, tol: f64) -> Result<CheckReport> {
    let n = b.rows();
    if n > 64 {
        return Err(Error::InvalidArgument("eigenpair check is limited to n <= 64".into()));
    }
    let spec = jacobi_eigen(b)?;
    let p = sympoly_dense(b, tau)?;
    let sigma = complementary_sigma(&spec.eigenvalues, tau)?;
    let norm = sigma.iter().copied().fold(0.0, f64::max);
    let mut r = CheckReport::new("sympoly_eigenpairs", json!({"n": n, "tau": tau, "tol": tol}));
    for (i, s) in sigma.iter().enumerate() {
        let q = spec.eigenvector(i);
        let pq = p.mul_vec(&q);
        let dev = pq.iter().zip(&q).map(|(a, b)| (a - s * b).powi(2)).sum::<f64>().sqrt() / norm;
        r.item(format!("eigenpair {i}"), dev, tol);
    }
    Ok(r)
}

/// `||P_{n-1} - det(B) B^{-1}||_F / ||det(B) B^{-1}||_F <= tol`.
pub fn verify_adjugate(b: &DenseMatrix, tol: f64) -> Result<CheckReport> {
    let n = b.rows();
    let ch = Cholesky::new(b)?;
    let target = ch.inverse().scale(ch.det());
    let p = sympoly_dense(b, n - 1)?;
    let dev = p.sub(&target)?.frobenius_norm() / target.frobenius_norm();
    let mut r = CheckReport::new("adjugate", json!({"n": n, "tol": tol}));
    r.item("relative frobenius deviation", dev, tol);
    Ok(r)
}

/// Eigenvalues of `B^{1/2} P_tau B^{1/2}` (as the similar `L^T P L`) lie in
/// `[lambda_n sigma_tau(lambda_{-n}), lambda_1 sigma_tau(lambda_{-1})]`, up to `tol` times the upper end.
pub fn verify_sandwich(b: &DenseMatrix, tau: usize, tol: f64) -> Result<CheckReport> {
    let n = b.rows();
    let spec = jacobi_eigen(b)?;
    let l = spec.eigenvalues.clone();
    let sigma = complementary_sigma(&l, tau)?;
    let lo = l[n - 1] * sigma[n - 1];
    let hi = l[0] * sigma[0];
    let p = sympoly_dense(b, tau)?;
    let lf = Cholesky::new(b)?.factor().clone();
    let mut m = lf.transpose().matmul(&p)?.matmul(&lf)?;
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, a);
            m.set(j, i, a);
        }
    }
    let eig = jacobi_eigen(&m)?.eigenvalues;
    let mut r = CheckReport::new("sandwich", json!({"n": n, "tau": tau, "tol": tol, "lower": lo, "upper": hi}));
    let scale = hi.abs().max(lo.abs());
    r.item("max eigenvalue above upper", (eig[0] - hi) / scale, tol);
    r.item("min eigenvalue below lower", (lo - eig[n - 1]) / scale, tol);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenpairs_on_diagonal() {
        let b = DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]);
        for tau in 0..3 {
            assert!(verify_eigenpairs(&b, tau, 1e-12).unwrap().pass);
        }
        let p1 = sympoly_dense(&b, 1).unwrap();
        assert_eq!(p1.diagonal(), vec![3.0, 4.0, 5.0]);
        let p2 = sympoly_dense(&b, 2).unwrap();
        for (got, want) in p2.diagonal().iter().zip([2.0, 3.0, 6.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(sympoly_dense(&b, 0).unwrap(), DenseMatrix::identity(3));
    }

    #[test]
    fn adjugate_examples() {
        assert!(verify_adjugate(&DenseMatrix::from_diagonal(&[3.0, 2.0, 1.0]), 1e-12).unwrap().pass);
        assert!(verify_adjugate(&DenseMatrix::identity(4), 1e-14).unwrap().pass);
    }

    #[test]
    fn sandwich_on_diagonal() {
        let b = DenseMatrix::from_diagonal(&[4.0, 2.0, 1.0, 0.5]);
        for tau in 0..4 {
            assert!(verify_sandwich(&b, tau, 1e-9).unwrap().pass);
        }
    }

    #[test]
    fn complementary_values() {
        let s = complementary_sigma(&[3.0, 2.0, 1.0], 1).unwrap();
        for (got, want) in s.iter().zip([3.0, 4.0, 5.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }
}
