//! Regression problems whose curvature matrix has a prescribed spectrum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::random::{gaussian_vector, random_orthogonal, random_orthonormal, rng_from_seed};
use crate::operators::DenseMatrix;
use crate::problems::{make_regression, CompositeObjective, CurvatureMode, Loss, RegressionData, RegressionOptions, SparseRows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rotation {
    Identity,
    #[default]
    RandomOrthogonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpectrumSpec {
    /// Positive and non-increasing.
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
    pub rotation: Rotation,
    /// Number of data rows; defaults to `n` for Huber and `5n` for logistic.
    pub rows: Option<usize>,
}

impl SyntheticSpectrumSpec {
    /// `(lambda_1, lambda_2, tail, .., tail)` of length `n`.
    pub fn pattern(lambda1: f64, lambda2: f64, tail: f64, n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("pattern needs n >= 2".into()));
        }
        let mut eigenvalues = vec![lambda1, lambda2];
        eigenvalues.resize(n, tail);
        let spec = Self { eigenvalues, seed, rotation: Rotation::RandomOrthogonal, rows: None };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.eigenvalues;
        if l.is_empty() || l.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be positive and finite".into()));
        }
        if l.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("eigenvalues must be sorted descending".into()));
        }
        if self.rows.is_some_and(|m| m < l.len()) {
            return Err(Error::InvalidArgument("need at least n data rows".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    pub objective: CompositeObjective,
    /// The planted point the targets were generated from.
    pub x_natural: Vec<f64>,
    /// Known minimum value, when the construction fixes it.
    pub f_star: Option<f64>,
    pub data_matrix: DenseMatrix,
}

/// Data `A = U diag(sqrt(lambda)) Q^T` with orthonormal `U` (`U = I` for
/// square data), so `B = A^T A = Q diag(lambda) Q^T`.
///
/// Huber targets are `b = A x_natural`, making `x_natural` a minimizer with
/// value 0. Logistic labels are drawn as `+1` with probability
/// `logistic'(<a_i, x_natural>)`.
pub fn synth_regression(spec: &SyntheticSpectrumSpec, loss: Loss) -> Result<SyntheticProblem> {
    spec.validate()?;
    let n = spec.dim();
    let m = spec.rows.unwrap_or(match loss {
        Loss::Huber { .. } => n,
        Loss::Logistic => 5 * n,
    });
    let mut rng = rng_from_seed(spec.seed);
    let q = match spec.rotation {
        Rotation::Identity => DenseMatrix::identity(n),
        Rotation::RandomOrthogonal => random_orthogonal(&mut rng, n),
    };
    let sqrt: Vec<f64> = spec.eigenvalues.iter().map(|l| l.sqrt()).collect();
    // S Q^T, then left-multiplied by U when the data is tall.
    let sq = DenseMatrix::from_columns_fn(n, n, |j| (0..n).map(|i| sqrt[i] * q.get(j, i)).collect());
    let a = if m == n { sq } else { random_orthonormal(&mut rng, m, n).matmul(&sq)? };
    let x_natural = gaussian_vector(&mut rng, n);
    let rows = SparseRows::from_dense(&a);
    let options = RegressionOptions { curvature: CurvatureMode::Dense, ..RegressionOptions::default() };
    let (data, f_star) = match loss {
        Loss::Huber { .. } => (RegressionData::new(rows, a.mul_vec(&x_natural), loss)?, Some(0.0)),
        Loss::Logistic => {
            let labels: Vec<f64> = a
                .mul_vec(&x_natural)
                .iter()
                .map(|z| {
                    let p = 1.0 / (1.0 + (-z).exp());
                    if rng.random::<f64>() < p { 1.0 } else { -1.0 }
                })
                .collect();
            (RegressionData::logistic_from_labels(rows, &labels)?, None)
        }
    };
    let mut objective = make_regression(data, options)?;
    if let Some(f) = f_star {
        objective = objective.with_known_minimum(f);
    }
    Ok(SyntheticProblem { objective, x_natural, f_star, data_matrix: a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::jacobi_eigen;

    #[test]
    fn identity_rotation_is_diagonal() {
        let spec = SyntheticSpectrumSpec { eigenvalues: vec![10.0, 1.0, 1.0], seed: 1, rotation: Rotation::Identity, rows: None };
        let p = synth_regression(&spec, Loss::Huber { mu: 0.1 }).unwrap();
        let b = p.objective.curvature_dense();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { spec.eigenvalues[i] } else { 0.0 };
                assert!((b.get(i, j) - want).abs() <= 4.0 * f64::EPSILON * want.max(1.0));
            }
        }
        assert_eq!(p.objective.value(&p.x_natural), 0.0);
    }

    #[test]
    fn spectrum_round_trip() {
        for (seed, loss) in [(3, Loss::Huber { mu: 0.1 }), (4, Loss::Logistic)] {
            let spec = SyntheticSpectrumSpec::pattern(100.0, 10.0, 1.0, 12, seed).unwrap();
            let p = synth_regression(&spec, loss).unwrap();
            let eig = jacobi_eigen(&p.objective.curvature_dense()).unwrap().eigenvalues;
            for (a, b) in eig.iter().zip(&spec.eigenvalues) {
                assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        let spec = SyntheticSpectrumSpec::pattern(50.0, 5.0, 1.0, 8, 9).unwrap();
        let a = synth_regression(&spec, Loss::Logistic).unwrap();
        let b = synth_regression(&spec, Loss::Logistic).unwrap();
        assert_eq!(a.data_matrix, b.data_matrix);
        assert_eq!(a.x_natural, b.x_natural);
        assert_eq!(a.objective.value(&a.x_natural), b.objective.value(&b.x_natural));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SyntheticSpectrumSpec::pattern(1.0, 2.0, 1.0, 5, 0).is_err());
        assert!(SyntheticSpectrumSpec::pattern(2.0, 1.0, 0.0, 5, 0).is_err());
        assert!(SyntheticSpectrumSpec::pattern(2.0, 1.0, 1.0, 1, 0).is_err());
    }
}
