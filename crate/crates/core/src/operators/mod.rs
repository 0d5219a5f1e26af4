//! Symmetric linear operators and the spectral primitives built on them.
//!
//! A [`SymmetricOperator`] is either backed by a dense matrix or by any
//! [`LinearMap`] (matrix-free). Every product goes through the operator so
//! that its matvec counter reflects the true cost of a run.

mod dense;
mod eigen;
mod polynomial;
pub mod random;
mod symmetric;
mod trace;
pub mod vector;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

pub use dense::{Cholesky, DenseMatrix};
pub use eigen::{jacobi_eigen, SpectralDecomposition};
pub use polynomial::{apply_polynomial, PolynomialCoefficients};
pub(crate) use polynomial::{poly_add_assign, poly_mul};
pub use symmetric::{elementary_symmetric, elementary_symmetric_with_scale, power_sums, ElementarySymmetric};
pub use trace::{stochastic_trace, stochastic_trace_estimates, TraceEstimate};

use crate::error::{Error, Result};
use vector::dot;

/// A symmetric linear map given only through its action on vectors.
pub trait LinearMap: Send + Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    /// Dense representation, when the map can produce one cheaply.
    fn to_dense(&self) -> Option<DenseMatrix> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Dense,
    MatrixFree,
}

enum Repr {
    Dense(DenseMatrix),
    Free(Box<dyn LinearMap>),
}

/// The curvature operator `B`.
///
/// Immutable after construction apart from the matvec counter, which is
/// atomic so an operator can be shared by concurrent runs.
pub struct SymmetricOperator {
    repr: Repr,
    matvecs: AtomicU64,
    spectrum: OnceLock<SpectralDecomposition>,
}

impl fmt::Debug for SymmetricOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricOperator")
            .field("dim", &self.dim())
            .field("kind", &self.kind())
            .field("matvecs", &self.matvec_count())
            .finish()
    }
}

impl SymmetricOperator {
    /// Dense operator; rejects non-square or visibly non-symmetric input.
    pub fn dense(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let asym = m.max_asymmetry();
        if asym > 1e-10 * m.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Ok(Self::from_repr(Repr::Dense(m)))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_repr(Repr::Dense(DenseMatrix::from_diagonal(d)))
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn matrix_free(map: impl LinearMap + 'static) -> Self {
        Self::from_repr(Repr::Free(Box::new(map)))
    }

    fn from_repr(repr: Repr) -> Self {
        Self { repr, matvecs: AtomicU64::new(0), spectrum: OnceLock::new() }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense(m) => m.rows(),
            Repr::Free(map) => map.dim(),
        }
    }

    pub fn kind(&self) -> OperatorKind {
        match self.repr {
            Repr::Dense(_) => OperatorKind::Dense,
            Repr::Free(_) => OperatorKind::MatrixFree,
        }
    }

    pub fn is_dense(&self) -> bool {
        self.kind() == OperatorKind::Dense
    }

    pub fn dense_matrix(&self) -> Option<&DenseMatrix> {
        match &self.repr {
            Repr::Dense(m) => Some(m),
            Repr::Free(_) => None,
        }
    }

    /// Dense copy of the operator. Matrix-free maps without a dense form
    /// are probed with the unit vectors (not counted as matvecs).
    pub fn to_dense_matrix(&self) -> DenseMatrix {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Free(map) => map.to_dense().unwrap_or_else(|| {
                let n = map.dim();
                DenseMatrix::from_columns_fn(n, n, |j| {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    let mut out = vec![0.0; n];
                    map.apply_into(&e, &mut out);
                    out
                })
            }),
        }
    }

    pub fn densified(&self) -> Result<Self> {
        let mut m = self.to_dense_matrix();
        // Symmetrize away roundoff from the probing.
        let n = m.rows();
        for i in 0..n {
            for j in 0..i {
                let a = 0.5 * (m.get(i, j) + m.get(j, i));
                m.set(i, j, a);
                m.set(j, i, a);
            }
        }
        Self::dense(m)
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        let expected = self.dim();
        if got != expected {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// `out = B v`, counted. Lengths are the caller's responsibility.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        match &self.repr {
            Repr::Dense(m) => m.mul_vec_into(v, out),
            Repr::Free(map) => map.apply_into(v, out),
        }
    }

    /// `out = B v` without touching the counter, for objective evaluations
    /// that are accounted for separately (e.g. the gradient of a quadratic).
    pub(crate) fn apply_uncounted(&self, v: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Dense(m) => m.mul_vec_into(v, out),
            Repr::Free(map) => map.apply_into(v, out),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v.len())?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    pub fn matvec_count(&self) -> u64 {
        self.matvecs.load(Ordering::Relaxed)
    }

    pub fn reset_matvec_count(&self) {
        self.matvecs.store(0, Ordering::Relaxed);
    }

    /// `<Bv, v>`, one matvec.
    pub fn b_norm_sq(&self, v: &[f64]) -> Result<f64> {
        let bv = self.matvec(v)?;
        let value = dot(&bv, v);
        if value < -1e-12 * dot(v, v) {
            return Err(Error::NotPositiveSemidefinite { value });
        }
        Ok(value.max(0.0))
    }

    /// Dense eigendecomposition, computed once and cached.
    pub fn spectral_decomposition(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let m = self.dense_matrix().ok_or(Error::DenseRequired)?;
        let s = jacobi_eigen(m)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    pub fn eigenvalues(&self) -> Result<&[f64]> {
        Ok(&self.spectral_decomposition()?.eigenvalues)
    }

    /// `tr(B), tr(B^2), .., tr(B^k_max)` for a dense operator.
    ///
    /// Uses `tr(B^k) = <B^a, B^b>_F` with `a + b = k`, which only needs powers
    /// up to `ceil(k/2)` and keeps every term of the sum nonnegative for even `k`.
    pub fn exact_traces(&self, k_max: usize) -> Result<Vec<f64>> {
        let b = self.dense_matrix().ok_or(Error::DenseRequired)?;
        let n = b.rows();
        let mut powers = vec![DenseMatrix::identity(n)];
        let needed = k_max.div_ceil(2);
        for _ in 0..needed {
            let next = powers.last().expect("nonempty").matmul(b)?;
            powers.push(next);
        }
        Ok((1..=k_max)
            .map(|k| {
                let a = k / 2;
                dot(powers[a].as_slice(), powers[k - a].as_slice())
            })
            .collect())
    }
}

/// Free-function form of [`SymmetricOperator::matvec`].
pub fn matvec(op: &SymmetricOperator, v: &[f64]) -> Result<Vec<f64>> {
    op.matvec(v)
}

pub fn b_norm_sq(op: &SymmetricOperator, v: &[f64]) -> Result<f64> {
    op.b_norm_sq(v)
}

pub fn exact_traces(op: &SymmetricOperator, k_max: usize) -> Result<Vec<f64>> {
    op.exact_traces(k_max)
}
