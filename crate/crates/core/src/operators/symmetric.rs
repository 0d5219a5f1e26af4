//! Elementary symmetric polynomials of a set of positive values.

use crate::error::{Error, Result};

/// `sigma_0 .. sigma_kmax` of values pre-divided by their maximum.
///
/// `sigma_k` grows combinatorially, so ratios of equal-order values should
/// be taken on the scaled numbers; [`ElementarySymmetric::value`] undoes the
/// scaling when the raw magnitude is wanted.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementarySymmetric {
    scaled: Vec<f64>,
    scale: f64,
}

impl ElementarySymmetric {
    /// `sigma_k` of the scaled values `v_i / scale`.
    pub fn scaled(&self, k: usize) -> f64 {
        self.scaled[k]
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn k_max(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `sigma_k` of the original values.
    pub fn value(&self, k: usize) -> f64 {
        self.scaled[k] * self.scale.powi(k as i32)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.scaled.len()).map(|k| self.value(k)).collect()
    }
}

/// Prefix dynamic programme `e_k <- e_k + v * e_{k-1}` on scaled inputs.
pub fn elementary_symmetric(values: &[f64], k_max: usize) -> Result<ElementarySymmetric> {
    elementary_symmetric_with_scale(values, k_max, None)
}

/// Same as [`elementary_symmetric`] but with a caller-chosen scale, so that
/// results for different subsets of one spectrum share the same units.
pub fn elementary_symmetric_with_scale(
    values: &[f64],
    k_max: usize,
    scale: Option<f64>,
) -> Result<ElementarySymmetric> {
    if k_max > values.len() {
        return Err(Error::DegreeOutOfRange { degree: k_max, max: values.len() });
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("elementary symmetric inputs must be finite and nonnegative".into()));
    }
    let scale = match scale {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::InvalidArgument(format!("scale must be positive, got {s}"))),
        None => {
            let m = values.iter().fold(0.0_f64, |m, v| m.max(*v));
            if m > 0.0 { m } else { 1.0 }
        }
    };
    let mut e = vec![0.0; k_max + 1];
    e[0] = 1.0;
    for (count, v) in values.iter().enumerate() {
        let v = v / scale;
        let top = k_max.min(count + 1);
        for k in (1..=top).rev() {
            e[k] += v * e[k - 1];
        }
    }
    Ok(ElementarySymmetric { scaled: e, scale })
}

/// Power sums `u_1 .. u_kmax`.
pub fn power_sums(values: &[f64], k_max: usize) -> Vec<f64> {
    (1..=k_max).map(|k| values.iter().map(|v| v.powi(k as i32)).sum()).collect()
}
