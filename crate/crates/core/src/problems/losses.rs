//! Scalar losses `phi` of the regression model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Huber loss: `t^2 / (2 mu)` for `|t| <= mu`, else `|t| - mu / 2`.
pub fn huber(t: f64, mu: f64) -> (f64, f64) {
    let a = t.abs();
    if a <= mu {
        (t * t / (2.0 * mu), t / mu)
    } else {
        (a - 0.5 * mu, t.signum())
    }
}

/// Softplus `log(1 + e^t)` and its derivative, stable for large `|t|`.
pub fn logistic(t: f64) -> (f64, f64) {
    let value = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
    let deriv = if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    };
    (value, deriv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    Huber { mu: f64 },
    Logistic,
}

impl Loss {
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Loss::Huber { mu } => huber(t, mu),
            Loss::Logistic => logistic(t),
        }
    }

    /// `sup phi''`.
    pub fn smoothness(&self) -> f64 {
        match *self {
            Loss::Huber { mu } => 1.0 / mu,
            Loss::Logistic => 0.25,
        }
    }

    /// `inf phi''`.
    pub fn strong_convexity(&self) -> f64 {
        0.0
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Loss::Huber { mu } => write!(f, "huber:{mu}"),
            Loss::Logistic => write!(f, "logistic"),
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "logistic" {
            return Ok(Loss::Logistic);
        }
        let mu = match s.strip_prefix("huber") {
            Some("") => 0.1,
            Some(rest) => rest
                .strip_prefix(':')
                .and_then(|m| m.parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidArgument(format!("bad huber parameter in '{s}'")))?,
            None => return Err(Error::InvalidArgument(format!("unknown loss '{s}'"))),
        };
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("huber parameter must be positive, got {mu}")));
        }
        Ok(Loss::Huber { mu })
    }
}
