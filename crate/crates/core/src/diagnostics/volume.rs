//! Exact-enumeration oracle for volume sampling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{elementary_symmetric, jacobi_eigen, Cholesky, DenseMatrix};
use crate::diagnostics::spectral::sympoly_dense;

#[derive(Debug, Clone, Serialize)]
pub struct VolumeSamplingReport {
    pub m: usize,
    /// `E[I_S (B_SS)^{-1} I_S^T]` under `Pr(S) ∝ det(B_SS)`, `|S| = m`.
    pub expectation: DenseMatrix,
    /// Unnormalized `P_{m-1}`.
    pub reference: DenseMatrix,
    /// Least-squares `c` in `E ≈ c P_{m-1}`.
    pub constant: f64,
    /// `1 / sigma_m(lambda)`, the constant predicted from the spectrum.
    pub predicted_constant: f64,
    /// `max |E - c P| / max |E|`.
    pub max_relative_deviation: f64,
    pub subsets: usize,
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn volume_sampling_expectation(b: &DenseMatrix, m: usize) -> Result<VolumeSamplingReport> {
    let n = b.rows();
    if !b.is_square() {
        return Err(Error::NotSquare { rows: b.rows(), cols: b.cols() });
    }
    if n > 12 || m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need n <= 12 and 1 <= m <= n, got n = {n}, m = {m}")));
    }
    let all = subsets(n, m);
    let mut e = DenseMatrix::zeros(n, n);
    let mut total = 0.0;
    for s in &all {
        let sub = b.principal_submatrix(s);
        let ch = Cholesky::new(&sub)?;
        let det = ch.det();
        let inv = ch.inverse();
        for (a, &i) in s.iter().enumerate() {
            for (c, &j) in s.iter().enumerate() {
                e.set(i, j, e.get(i, j) + det * inv.get(a, c));
            }
        }
        total += det;
    }
    let e = e.scale(1.0 / total);
    let p = sympoly_dense(b, m - 1)?;
    let pp: f64 = p.as_slice().iter().map(|x| x * x).sum();
    let ep: f64 = p.as_slice().iter().zip(e.as_slice()).map(|(x, y)| x * y).sum();
    let constant = ep / pp;
    let dev = e.sub(&p.scale(constant))?.max_abs() / e.max_abs();
    let spec = jacobi_eigen(b)?.eigenvalues;
    let predicted_constant = 1.0 / elementary_symmetric(&spec, m)?.value(m);
    Ok(VolumeSamplingReport {
        m,
        expectation: e,
        reference: p,
        constant,
        predicted_constant,
        max_relative_deviation: dev,
        subsets: all.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(5, 5), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
        assert!(subsets(2, 3).is_empty());
    }

    #[test]
    fn two_by_two_examples() {
        let b = DenseMatrix::from_diagonal(&[1.0, 2.0]);
        let r = volume_sampling_expectation(&b, 1).unwrap();
        assert!(r.expectation.sub(&DenseMatrix::identity(2).scale(1.0 / 3.0)).unwrap().max_abs() < 1e-15);
        assert!((r.constant - 1.0 / 3.0).abs() < 1e-15);
        let r = volume_sampling_expectation(&b, 2).unwrap();
        let d = r.expectation.diagonal();
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
        assert!((r.constant - 0.5).abs() < 1e-15 && (r.predicted_constant - 0.5).abs() < 1e-15);
        assert!(r.max_relative_deviation < 1e-15);
    }

    #[test]
    fn full_subset_is_inverse() {
        let b = DenseMatrix::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.5, 3.0, 0.2], vec![0.0, 0.2, 1.0]]).unwrap();
        let r = volume_sampling_expectation(&b, 3).unwrap();
        let inv = Cholesky::new(&b).unwrap().inverse();
        assert!(r.expectation.sub(&inv).unwrap().max_abs() < 1e-14);
        assert!(r.max_relative_deviation < 1e-12);
    }
}
