//! Seeded random vectors and matrices for synthetic problems and tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operators::vector::{dot, norm};
use crate::operators::DenseMatrix;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`), from
/// modified Gram-Schmidt on Gaussian columns, re-orthogonalized once.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    assert!(rows >= cols, "need rows >= cols for orthonormal columns");
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = gaussian_vector(rng, rows);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        let r = norm(&v);
        if r > 1e-8 {
            v.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
        }
    }
    DenseMatrix::from_columns_fn(rows, cols, |j| basis[j].clone())
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    random_orthonormal(rng, n, n)
}

/// `Q diag(eigenvalues) Q^T` for a random orthogonal `Q`, symmetrized exactly.
pub fn random_spd_with_spectrum(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> DenseMatrix {
    let n = eigenvalues.len();
    let q = random_orthogonal(rng, n);
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..n).map(|k| q.get(i, k) * eigenvalues[k] * q.get(j, k)).sum();
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    m
}

/// Log-uniform spectrum on `[1, cond]` with both endpoints present, sorted descending.
pub fn log_uniform_spectrum(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> Vec<f64> {
    use rand::Rng;
    let mut l: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => cond,
            1 => 1.0,
            _ => cond.powf(rng.random::<f64>()),
        })
        .collect();
    if n == 1 {
        l[0] = 1.0;
    }
    l.sort_by(|a, b| b.total_cmp(a));
    l
}
