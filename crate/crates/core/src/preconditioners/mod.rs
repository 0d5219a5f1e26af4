//! Polynomial preconditioners and their quality measures.
//!
//! Every preconditioner here is a spectral function `P = p(B)` of the
//! curvature operator, so its quality on a dense operator is computed from
//! the eigenvalues alone: `alpha = min lambda_i p(lambda_i)` and
//! `beta = max lambda_i p(lambda_i)`.

mod chebyshev;
mod cutting;
mod sympoly;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use chebyshev::{chebyshev_degree, chebyshev_gamma_bound, chebyshev_polynomial, chebyshev_t, ChebyshevPolynomial};
pub use cutting::{cutting_for_spectrum, cutting_gamma_bound, cutting_polynomial, CuttingPolynomial};
pub use sympoly::{sympoly_coefficients, xi_tau};

use crate::error::{Error, Result};
use crate::operators::{stochastic_trace_estimates, Cholesky, PolynomialCoefficients, SymmetricOperator};

/// Where the traces feeding `P_tau` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Exact,
    Stochastic { samples: usize, seed: u64 },
}

/// Text-serializable identity of a preconditioner.
///
/// The text forms are `identity`, `sympoly:T`, `sympoly:T:stochastic:S:SEED`,
/// `chebyshev:T`, `cutting:T`, `explicit:c0,c1,..` and `inverse`.
#[derive(Debug, Clone, PartialEq)]
pub enum Descriptor {
    Identity,
    SymPoly { tau: usize, traces: TraceMode },
    Chebyshev { tau: usize },
    Cutting { tau: usize },
    Explicit(Vec<f64>),
    Inverse,
}

impl Descriptor {
    pub fn sympoly(tau: usize) -> Self {
        Descriptor::SymPoly { tau, traces: TraceMode::Exact }
    }

    /// Degree of the polynomial, i.e. matvecs per application.
    pub fn degree(&self) -> usize {
        match self {
            Descriptor::Identity | Descriptor::Inverse => 0,
            Descriptor::SymPoly { tau, .. } | Descriptor::Chebyshev { tau } | Descriptor::Cutting { tau } => *tau,
            Descriptor::Explicit(c) => c.len().saturating_sub(1),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Identity => write!(f, "identity"),
            Descriptor::SymPoly { tau, traces: TraceMode::Exact } => write!(f, "sympoly:{tau}"),
            Descriptor::SymPoly { tau, traces: TraceMode::Stochastic { samples, seed } } => {
                write!(f, "sympoly:{tau}:stochastic:{samples}:{seed}")
            }
            Descriptor::Chebyshev { tau } => write!(f, "chebyshev:{tau}"),
            Descriptor::Cutting { tau } => write!(f, "cutting:{tau}"),
            Descriptor::Explicit(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
            Descriptor::Inverse => write!(f, "inverse"),
        }
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognised preconditioner '{s}'"));
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["identity"] | ["none"] => Ok(Descriptor::Identity),
            ["inverse"] => Ok(Descriptor::Inverse),
            ["sympoly", t] => Ok(Descriptor::sympoly(int(t)?)),
            ["sympoly", t, "stochastic", samples, seed] => Ok(Descriptor::SymPoly {
                tau: int(t)?,
                traces: TraceMode::Stochastic {
                    samples: int(samples)?,
                    seed: seed.trim().parse().map_err(|_| bad())?,
                },
            }),
            ["chebyshev", t] => Ok(Descriptor::Chebyshev { tau: int(t)? }),
            ["cutting", t] => Ok(Descriptor::Cutting { tau: int(t)? }),
            ["explicit", list] => {
                let coeffs = list
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(bad());
                }
                Ok(Descriptor::Explicit(coeffs))
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for Descriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Descriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
enum Action {
    Identity,
    Polynomial(PolynomialCoefficients),
    Chebyshev(ChebyshevPolynomial),
    Cutting(CuttingPolynomial),
    Inverse(Arc<Cholesky>),
}

/// An immutable preconditioner `P = p(B)`.
#[derive(Debug, Clone)]
pub struct Preconditioner {
    descriptor: Descriptor,
    action: Action,
}

impl Preconditioner {
    pub fn identity() -> Self {
        Self { descriptor: Descriptor::Identity, action: Action::Identity }
    }

    /// `P_tau` built from exact or estimated traces of `op`.
    pub fn sympoly(op: &SymmetricOperator, tau: usize, traces: TraceMode) -> Result<Self> {
        let n = op.dim();
        if tau > n.saturating_sub(1) {
            return Err(Error::DegreeOutOfRange { degree: tau, max: n.saturating_sub(1) });
        }
        let t = match traces {
            _ if tau == 0 => Vec::new(),
            TraceMode::Exact => op.exact_traces(tau)?,
            TraceMode::Stochastic { samples, seed } => {
                stochastic_trace_estimates(op, tau, samples, seed)?.iter().map(|e| e.mean).collect()
            }
        };
        Ok(Self {
            descriptor: Descriptor::SymPoly { tau, traces },
            action: Action::Polynomial(sympoly_coefficients(&t, tau)?),
        })
    }

    /// Chebyshev polynomial of degree `tau` on the given interval.
    pub fn chebyshev_on(lambda_max: f64, lambda_min: f64, tau: usize) -> Result<Self> {
        let action = if lambda_max == lambda_min && lambda_min > 0.0 {
            Action::Polynomial(PolynomialCoefficients::constant(1.0 / lambda_max))
        } else {
            Action::Chebyshev(ChebyshevPolynomial::new(lambda_max, lambda_min, tau)?)
        };
        Ok(Self { descriptor: Descriptor::Chebyshev { tau }, action })
    }

    /// Chebyshev polynomial on `[lambda_n, lambda_1]` of a dense operator.
    pub fn chebyshev(op: &SymmetricOperator, tau: usize) -> Result<Self> {
        let s = op.spectral_decomposition()?;
        Self::chebyshev_on(s.lambda_max(), s.lambda_min(), tau)
    }

    /// Cutting polynomial from a known spectrum.
    pub fn cutting_on(spectrum: &[f64], tau: usize) -> Result<Self> {
        Ok(Self {
            descriptor: Descriptor::Cutting { tau },
            action: Action::Cutting(CuttingPolynomial::for_spectrum(spectrum, tau)?),
        })
    }

    pub fn cutting(op: &SymmetricOperator, tau: usize) -> Result<Self> {
        Self::cutting_on(op.eigenvalues()?, tau)
    }

    pub fn explicit(coeffs: PolynomialCoefficients) -> Self {
        Self { descriptor: Descriptor::Explicit(coeffs.coeffs().to_vec()), action: Action::Polynomial(coeffs) }
    }

    /// `P = B^{-1}` through a dense Cholesky factorization.
    pub fn inverse(op: &SymmetricOperator) -> Result<Self> {
        let m = op.dense_matrix().ok_or(Error::DenseRequired)?;
        Ok(Self { descriptor: Descriptor::Inverse, action: Action::Inverse(Arc::new(Cholesky::new(m)?)) })
    }

    pub fn from_descriptor(descriptor: &Descriptor, op: &SymmetricOperator) -> Result<Self> {
        match descriptor {
            Descriptor::Identity => Ok(Self::identity()),
            Descriptor::SymPoly { tau, traces } => Self::sympoly(op, *tau, *traces),
            Descriptor::Chebyshev { tau } => Self::chebyshev(op, *tau),
            Descriptor::Cutting { tau } => Self::cutting(op, *tau),
            Descriptor::Explicit(c) => Ok(Self::explicit(PolynomialCoefficients::new(c.clone()))),
            Descriptor::Inverse => Self::inverse(op),
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    /// Monomial coefficients, when the preconditioner is stored that way.
    pub fn coefficients(&self) -> Option<&PolynomialCoefficients> {
        match &self.action {
            Action::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    /// Normalization divisor of the underlying polynomial (1 when none).
    pub fn scale(&self) -> f64 {
        self.coefficients().map_or(1.0, |p| p.scale())
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.action, Action::Identity)
    }

    /// Curvature matvecs spent by one [`Preconditioner::apply`].
    pub fn matvecs_per_apply(&self) -> u64 {
        match &self.action {
            Action::Identity | Action::Inverse(_) => 0,
            Action::Polynomial(p) => p.degree() as u64,
            Action::Chebyshev(c) => c.degree() as u64,
            Action::Cutting(c) => c.degree() as u64,
        }
    }

    /// `p(s)`, the eigenvalue of `P` on an eigenvector of `B` with eigenvalue `s`.
    pub fn eval(&self, s: f64) -> f64 {
        match &self.action {
            Action::Identity => 1.0,
            Action::Polynomial(p) => p.eval(s),
            Action::Chebyshev(c) => c.eval(s),
            Action::Cutting(c) => c.eval(s),
            Action::Inverse(_) => 1.0 / s,
        }
    }

    pub fn apply(&self, op: &SymmetricOperator, v: &[f64]) -> Result<Vec<f64>> {
        op.check_dim(v.len())?;
        match &self.action {
            Action::Identity => Ok(v.to_vec()),
            Action::Polynomial(p) => p.apply(op, v),
            Action::Chebyshev(c) => c.apply(op, v),
            Action::Cutting(c) => c.apply(op, v),
            Action::Inverse(ch) => Ok(ch.solve(v)),
        }
    }

    /// `alpha`, `beta`, `gamma` and `beta / alpha` over the spectrum of a dense operator.
    pub fn quality(&self, op: &SymmetricOperator) -> Result<QualityBounds> {
        compute_alpha_beta(self, op)
    }
}

/// Spectral quality of a preconditioner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityBounds {
    pub alpha: f64,
    pub beta: f64,
    /// `max |s p(s) - 1|` for the preconditioner as stored (scale dependent).
    pub gamma: f64,
    pub cond: f64,
}

impl QualityBounds {
    /// `gamma` after the optimal rescaling `p -> 2 p / (alpha + beta)`.
    pub fn best_gamma(&self) -> f64 {
        (self.beta - self.alpha) / (self.beta + self.alpha)
    }
}

/// Tightest `alpha B^{-1} <= P <= beta B^{-1}` from the eigenvalues of `op`.
pub fn compute_alpha_beta(prec: &Preconditioner, op: &SymmetricOperator) -> Result<QualityBounds> {
    quality_on_spectrum(prec, op.eigenvalues()?)
}

/// Same as [`compute_alpha_beta`] on an explicit spectrum.
pub fn quality_on_spectrum(prec: &Preconditioner, spectrum: &[f64]) -> Result<QualityBounds> {
    if spectrum.is_empty() {
        return Err(Error::InvalidArgument("empty spectrum".into()));
    }
    let mut alpha = f64::INFINITY;
    let mut beta = f64::NEG_INFINITY;
    let mut gamma = 0.0_f64;
    for &s in spectrum {
        let v = s * prec.eval(s);
        alpha = alpha.min(v);
        beta = beta.max(v);
        gamma = gamma.max((v - 1.0).abs());
    }
    if !(alpha > 0.0) || !beta.is_finite() {
        return Err(Error::IndefinitePreconditioner { alpha, beta });
    }
    Ok(QualityBounds { alpha, beta, gamma, cond: beta / alpha })
}

/// Which set of points a `gamma` value was measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaDomain {
    Spectrum,
    Grid { points: usize },
}

/// `max over s in spectrum of |s p(s) - 1|`.
pub fn gamma_of_polynomial(p: &PolynomialCoefficients, spectrum: &[f64]) -> f64 {
    gamma_of_fn(|s| p.eval(s), spectrum.iter().copied())
}

/// `gamma` over `points` equispaced nodes of `[lo, hi]`.
pub fn gamma_on_grid(p: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    let nodes = (0..points).map(move |i| {
        if points == 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (points - 1) as f64
        }
    });
    gamma_of_fn(p, nodes)
}

pub fn gamma_of_fn(p: impl Fn(f64) -> f64, nodes: impl IntoIterator<Item = f64>) -> f64 {
    nodes.into_iter().map(|s| (s * p(s) - 1.0).abs()).fold(0.0, f64::max)
}

/// `(1 + gamma) / (1 - gamma)`.
pub fn cond_from_gamma(gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    Ok((1.0 + gamma) / (1.0 - gamma))
}
