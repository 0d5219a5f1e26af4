//! Randomized estimates of `tr(B^k)` from matvecs only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operators::vector::{dot, norm};
use crate::operators::SymmetricOperator;

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimate {
    pub mean: f64,
    pub std_error: f64,
}

fn unit_sphere_sample(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let r = norm(&u);
        if r > 0.0 {
            u.iter_mut().for_each(|x| *x /= r);
            return u;
        }
    }
}

/// Estimates `tr(B^1) .. tr(B^k_max)` from the same draws: each sample is
/// `n <B^k u, u>` with `u` uniform on the unit sphere.
pub fn stochastic_trace_estimates(
    op: &SymmetricOperator,
    k_max: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<TraceEstimate>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("stochastic trace needs at least one sample".into()));
    }
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; k_max];
    let mut sum_sq = vec![0.0; k_max];
    let mut w = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..samples {
        let u = unit_sphere_sample(&mut rng, n);
        w.copy_from_slice(&u);
        for k in 0..k_max {
            op.apply_into(&w, &mut next);
            std::mem::swap(&mut w, &mut next);
            let est = n as f64 * dot(&w, &u);
            sum[k] += est;
            sum_sq[k] += est * est;
        }
    }
    let s = samples as f64;
    Ok(sum
        .iter()
        .zip(&sum_sq)
        .map(|(&a, &b)| {
            let mean = a / s;
            let var = if samples > 1 { ((b / s - mean * mean) * s / (s - 1.0)).max(0.0) } else { 0.0 };
            TraceEstimate { mean, std_error: (var / s).sqrt() }
        })
        .collect())
}

/// Unbiased estimate of `tr(B^k)`.
pub fn stochastic_trace(op: &SymmetricOperator, k: usize, samples: usize, seed: u64) -> Result<f64> {
    if k == 0 {
        return Ok(op.dim() as f64);
    }
    let est = stochastic_trace_estimates(op, k, samples, seed)?;
    Ok(est[k - 1].mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_identity_is_exact() {
        let op = SymmetricOperator::diagonal(&[2.5; 6]);
        for samples in [1, 3, 17] {
            let t = stochastic_trace(&op, 1, samples, 11).unwrap();
            assert!((t - 15.0).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn converges_on_small_diagonal() {
        let op = SymmetricOperator::diagonal(&[3.0, 2.0, 1.0]);
        let t = stochastic_trace(&op, 1, 100_000, 5).unwrap();
        assert!((t - 6.0).abs() < 0.02 * 6.0, "{t}");
    }

    #[test]
    fn deterministic_given_seed() {
        let op = SymmetricOperator::diagonal(&[3.0, 2.0, 1.0]);
        let a = stochastic_trace(&op, 2, 1, 42).unwrap();
        let b = stochastic_trace(&op, 2, 1, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn zero_samples_rejected() {
        let op = SymmetricOperator::diagonal(&[1.0]);
        assert!(stochastic_trace(&op, 1, 0, 0).is_err());
    }
}
