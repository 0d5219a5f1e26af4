//! Row-sparse data matrices and the Gram operator `A^T A`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::{DenseMatrix, LinearMap};

/// Compressed sparse rows with 0-based, strictly increasing column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    pub fn new(n_cols: usize, rows: &[Vec<(usize, f64)>]) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for (r, row) in rows.iter().enumerate() {
            let mut last: Option<usize> = None;
            for &(j, v) in row {
                if j >= n_cols {
                    return Err(Error::InvalidArgument(format!("row {r}: column {j} out of range {n_cols}")));
                }
                if last.is_some_and(|l| j <= l) {
                    return Err(Error::InvalidArgument(format!("row {r}: column indices must increase")));
                }
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("row {r}: non-finite value")));
                }
                last = Some(j);
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Ok(Self { n_cols, indptr, indices, values })
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..m.rows())
            .map(|i| m.row(i).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).collect())
            .collect();
        Self::new(m.cols(), &rows).expect("dense rows are valid")
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(i);
        idx.iter().zip(val).map(|(j, v)| v * x[*j]).sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row_dot(i, x)).collect()
    }

    /// `out = A^T y`.
    pub fn mul_t_vec_into(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0.0 {
                continue;
            }
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                out[*j] += v * yi;
            }
        }
    }

    pub fn mul_t_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        self.mul_t_vec_into(y, &mut out);
        out
    }

    /// Dense `A^T A` accumulated row by row.
    pub fn gram_dense(&self) -> DenseMatrix {
        let n = self.n_cols;
        let mut g = vec![0.0; n * n];
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (a, (ja, va)) in idx.iter().zip(val).enumerate() {
                for (jb, vb) in idx[..=a].iter().zip(&val[..=a]) {
                    g[ja * n + jb] += va * vb;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[j * n + i] = g[i * n + j];
            }
        }
        DenseMatrix::from_row_major(n, n, g).expect("square")
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_rows(), self.n_cols);
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (j, v) in idx.iter().zip(val) {
                m.set(i, *j, *v);
            }
        }
        m
    }

    pub fn scale_rows(&mut self, factors: &[f64]) {
        for (i, f) in factors.iter().enumerate() {
            let (a, b) = (self.indptr[i], self.indptr[i + 1]);
            self.values[a..b].iter_mut().for_each(|v| *v *= f);
        }
    }

    pub fn column_norms(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n_cols];
        for (j, v) in self.indices.iter().zip(&self.values) {
            s[*j] += v * v;
        }
        s.into_iter().map(f64::sqrt).collect()
    }

    pub fn scale_columns(&mut self, factors: &[f64]) {
        for (j, v) in self.indices.iter().zip(self.values.iter_mut()) {
            *v *= factors[*j];
        }
    }
}

/// `v -> A^T A v + shift v` without forming the product.
#[derive(Debug, Clone)]
pub struct GramOperator {
    data: Arc<SparseRows>,
    shift: f64,
}

impl GramOperator {
    pub fn new(data: Arc<SparseRows>, shift: f64) -> Self {
        Self { data, shift }
    }
}

impl LinearMap for GramOperator {
    fn dim(&self) -> usize {
        self.data.n_cols()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let av = self.data.mul_vec(v);
        self.data.mul_t_vec_into(&av, out);
        if self.shift != 0.0 {
            out.iter_mut().zip(v).for_each(|(o, x)| *o += self.shift * x);
        }
    }
}
