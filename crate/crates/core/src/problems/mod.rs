//! Composite objectives `F = f + psi` with a curvature operator `B`
//! such that `mu B <= Hess f <= L B`.

mod data;
mod losses;
mod validate;

use std::fmt;
use std::sync::Arc;

pub use data::{GramOperator, SparseRows};
pub use losses::{huber, logistic, Loss};
pub use validate::{validate_bounds, BoundViolation, ValidationReport, ViolationKind, CURVATURE_TOL, GRADIENT_TOL};

use crate::error::{Error, Result};
use crate::operators::vector::{dot, norm_sq};
use crate::operators::{DenseMatrix, SymmetricOperator};
use crate::preconditioners::Preconditioner;

/// A smooth convex function supplied by the caller.
pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

/// Result of one metric gradient step `y = argmin <g, y> + psi(y) + (M/2)||y - x||^2_{P^-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricStep {
    pub y: Vec<f64>,
    /// `||y - x||^2` in the `P^{-1}` norm.
    pub dist_sq_pinv: f64,
    /// Curvature matvecs spent computing the step.
    pub matvecs: u64,
}

/// Proximal oracle for a nonzero composite part in the `P^{-1}` metric.
pub trait ProxOracle: Send + Sync {
    fn value(&self, y: &[f64]) -> f64;

    fn step(
        &self,
        m: f64,
        prec: &Preconditioner,
        op: &SymmetricOperator,
        x: &[f64],
        g: &[f64],
    ) -> Result<MetricStep>;
}

/// Value of a `psi` term that has no step oracle.
pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `psi` in `F = f + psi`.
#[derive(Clone, Default)]
pub enum CompositePart {
    #[default]
    Zero,
    Custom(Arc<dyn ProxOracle>),
    /// A value without a step oracle; gradient steps on it fail.
    ValueOnly(ValueFn),
}

impl fmt::Debug for CompositePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompositePart::Zero => "Zero",
            CompositePart::Custom(_) => "Custom",
            CompositePart::ValueOnly(_) => "ValueOnly",
        })
    }
}

impl CompositePart {
    pub fn is_zero(&self) -> bool {
        matches!(self, CompositePart::Zero)
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            CompositePart::Zero => 0.0,
            CompositePart::Custom(o) => o.value(y),
            CompositePart::ValueOnly(f) => f(y),
        }
    }
}

/// `lambda ||x||_1`, usable with the identity preconditioner only.
#[derive(Debug, Clone, Copy)]
pub struct SoftThreshold {
    pub lambda: f64,
}

impl ProxOracle for SoftThreshold {
    fn value(&self, y: &[f64]) -> f64 {
        self.lambda * y.iter().map(|v| v.abs()).sum::<f64>()
    }

    fn step(&self, m: f64, prec: &Preconditioner, _op: &SymmetricOperator, x: &[f64], g: &[f64]) -> Result<MetricStep> {
        if !prec.is_identity() {
            return Err(Error::InvalidArgument("soft thresholding needs the identity preconditioner".into()));
        }
        let t = self.lambda / m;
        let y: Vec<f64> = x
            .iter()
            .zip(g)
            .map(|(xi, gi)| {
                let z = xi - gi / m;
                z.signum() * (z.abs() - t).max(0.0)
            })
            .collect();
        let dist = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(MetricStep { y, dist_sq_pinv: dist, matvecs: 0 })
    }
}

/// Regression model `f(x) = sum_i phi(<a_i, x> - b_i) + (sigma/2)||x||^2`.
#[derive(Debug, Clone)]
pub struct RegressionData {
    pub rows: SparseRows,
    pub targets: Vec<f64>,
    pub loss: Loss,
}

impl RegressionData {
    pub fn new(rows: SparseRows, targets: Vec<f64>, loss: Loss) -> Result<Self> {
        if rows.n_rows() == 0 || rows.n_cols() == 0 {
            return Err(Error::InvalidArgument("regression data is empty".into()));
        }
        if targets.len() != rows.n_rows() {
            return Err(Error::DimensionMismatch { expected: rows.n_rows(), got: targets.len() });
        }
        if let Loss::Huber { mu } = loss {
            if !(mu > 0.0) {
                return Err(Error::InvalidArgument("huber parameter must be positive".into()));
            }
        }
        Ok(Self { rows, targets, loss })
    }

    /// Logistic model with labels `y_i` in `{-1, +1}` folded into the rows,
    /// so that the loss is `phi(-y_i <a_i, x>)`.
    pub fn logistic_from_labels(mut rows: SparseRows, labels: &[f64]) -> Result<Self> {
        if labels.len() != rows.n_rows() {
            return Err(Error::DimensionMismatch { expected: rows.n_rows(), got: labels.len() });
        }
        let factors: Vec<f64> = labels.iter().map(|y| if *y > 0.0 { -1.0 } else { 1.0 }).collect();
        rows.scale_rows(&factors);
        let m = rows.n_rows();
        Self::new(rows, vec![0.0; m], Loss::Logistic)
    }
}

/// How the curvature operator of a regression objective is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureMode {
    /// Dense when `n` is at most [`DENSE_AUTO_LIMIT`], matrix-free otherwise.
    #[default]
    Auto,
    Dense,
    MatrixFree,
}

pub const DENSE_AUTO_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, Default)]
pub struct RegressionOptions {
    pub curvature: CurvatureMode,
    /// `sigma` of the optional `(sigma/2)||x||^2` term; requires a dense curvature.
    pub l2: f64,
}

struct Regression {
    data: RegressionData,
    l2: f64,
}

impl Regression {
    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.data.rows.mul_vec(x);
        r.iter_mut().zip(&self.data.targets).for_each(|(ri, b)| *ri -= b);
        r
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s: f64 = self.residuals(x).iter().map(|r| self.data.loss.eval(*r).0).sum();
        s + 0.5 * self.l2 * norm_sq(x)
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let r = self.residuals(x);
        let mut value = 0.5 * self.l2 * norm_sq(x);
        let d: Vec<f64> = r
            .iter()
            .map(|ri| {
                let (v, d) = self.data.loss.eval(*ri);
                value += v;
                d
            })
            .collect();
        let mut g = self.data.rows.mul_t_vec(&d);
        if self.l2 != 0.0 {
            g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += self.l2 * xi);
        }
        (value, g)
    }
}

#[derive(Clone)]
enum Smooth {
    Quadratic { b: Vec<f64> },
    Regression(Arc<Regression>),
    Custom(Arc<dyn SmoothFunction>),
}

/// `F = f + psi` together with `B`, `L` and `mu`.
#[derive(Clone)]
pub struct CompositeObjective {
    smooth: Smooth,
    curvature: Arc<SymmetricOperator>,
    l: f64,
    mu: f64,
    psi: CompositePart,
    known_minimum: Option<f64>,
}

impl fmt::Debug for CompositeObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.smooth {
            Smooth::Quadratic { .. } => "quadratic",
            Smooth::Regression(r) => match r.data.loss {
                Loss::Huber { .. } => "huber",
                Loss::Logistic => "logistic",
            },
            Smooth::Custom(_) => "custom",
        };
        f.debug_struct("CompositeObjective")
            .field("kind", &kind)
            .field("dim", &self.dim())
            .field("L", &self.l)
            .field("mu", &self.mu)
            .field("psi", &self.psi)
            .finish()
    }
}

/// `f(x) = (1/2)<Bx, x> - <b, x>` with `L = mu = 1`.
pub fn make_quadratic(op: impl Into<Arc<SymmetricOperator>>, b: Vec<f64>) -> Result<CompositeObjective> {
    let op = op.into();
    op.check_dim(b.len())?;
    Ok(CompositeObjective {
        smooth: Smooth::Quadratic { b },
        curvature: op,
        l: 1.0,
        mu: 1.0,
        psi: CompositePart::Zero,
        known_minimum: None,
    })
}

/// Regression objective with `B = A^T A` (plus `(sigma / L_phi) I` when regularized).
pub fn make_regression(data: RegressionData, options: RegressionOptions) -> Result<CompositeObjective> {
    let n = data.rows.n_cols();
    let sigma = options.l2;
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("l2 weight must be nonnegative, got {sigma}")));
    }
    let dense = match options.curvature {
        CurvatureMode::Dense => true,
        CurvatureMode::MatrixFree => false,
        CurvatureMode::Auto => n <= DENSE_AUTO_LIMIT || sigma > 0.0,
    };
    if sigma > 0.0 && !dense {
        return Err(Error::Config("l2 regularization redefines B and needs a dense curvature".into()));
    }
    let l = data.loss.smoothness();
    let shift = sigma / l;
    let curvature = if dense {
        let mut g = data.rows.gram_dense();
        if shift != 0.0 {
            for i in 0..n {
                g.set(i, i, g.get(i, i) + shift);
            }
        }
        SymmetricOperator::dense(g)?
    } else {
        SymmetricOperator::matrix_free(GramOperator::new(Arc::new(data.rows.clone()), 0.0))
    };
    let mu = if sigma > 0.0 {
        let top = curvature.spectral_decomposition()?.lambda_max();
        (data.loss.strong_convexity() + sigma / top).min(l)
    } else {
        data.loss.strong_convexity()
    };
    Ok(CompositeObjective {
        smooth: Smooth::Regression(Arc::new(Regression { data, l2: sigma })),
        curvature: Arc::new(curvature),
        l,
        mu,
        psi: CompositePart::Zero,
        known_minimum: None,
    })
}

impl CompositeObjective {
    /// Objective from a user-supplied smooth part and curvature.
    pub fn custom(
        f: Arc<dyn SmoothFunction>,
        curvature: impl Into<Arc<SymmetricOperator>>,
        l: f64,
        mu: f64,
    ) -> Result<Self> {
        let curvature = curvature.into();
        curvature.check_dim(f.dim())?;
        if !(l > 0.0) || !(mu >= 0.0) || mu > l {
            return Err(Error::InvalidArgument(format!("need 0 <= mu <= L and L > 0, got mu = {mu}, L = {l}")));
        }
        Ok(Self { smooth: Smooth::Custom(f), curvature, l, mu, psi: CompositePart::Zero, known_minimum: None })
    }

    pub fn with_psi(mut self, psi: CompositePart) -> Self {
        self.psi = psi;
        self
    }

    /// Records `F*` when it is known in closed form or from a reference run.
    pub fn with_known_minimum(mut self, f_star: f64) -> Self {
        self.known_minimum = Some(f_star);
        self
    }

    pub fn dim(&self) -> usize {
        self.curvature.dim()
    }

    pub fn curvature(&self) -> &SymmetricOperator {
        &self.curvature
    }

    pub fn curvature_arc(&self) -> Arc<SymmetricOperator> {
        Arc::clone(&self.curvature)
    }

    pub fn lipschitz(&self) -> f64 {
        self.l
    }

    pub fn strong_convexity(&self) -> f64 {
        self.mu
    }

    pub fn psi(&self) -> &CompositePart {
        &self.psi
    }

    pub fn known_minimum(&self) -> Option<f64> {
        self.known_minimum
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.smooth, Smooth::Quadratic { .. })
    }

    /// Linear term `b` of a quadratic objective.
    pub fn quadratic_rhs(&self) -> Option<&[f64]> {
        match &self.smooth {
            Smooth::Quadratic { b } => Some(b),
            _ => None,
        }
    }

    pub fn regression_data(&self) -> Option<&RegressionData> {
        match &self.smooth {
            Smooth::Regression(r) => Some(&r.data),
            _ => None,
        }
    }

    fn b_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.curvature.apply_uncounted(x, &mut out);
        out
    }

    /// `f(x)`, the smooth part only.
    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.smooth {
            Smooth::Quadratic { b } => 0.5 * dot(&self.b_apply(x), x) - dot(b, x),
            Smooth::Regression(r) => r.value(x),
            Smooth::Custom(f) => f.value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match &self.smooth {
            Smooth::Quadratic { b } => {
                let bx = self.b_apply(x);
                let value = 0.5 * dot(&bx, x) - dot(b, x);
                let g = bx.iter().zip(b).map(|(a, c)| a - c).collect();
                (value, g)
            }
            Smooth::Regression(r) => r.value_and_gradient(x),
            Smooth::Custom(f) => (f.value(x), f.gradient(x)),
        }
    }

    /// `F(x) = f(x) + psi(x)`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.value(x) + self.psi.value(x)
    }

    /// Dense copy of `B`, for validators and exact minimizers.
    pub fn curvature_dense(&self) -> DenseMatrix {
        self.curvature.to_dense_matrix()
    }
}

/// Metric gradient step with its `P^{-1}` displacement.
pub fn metric_step(
    m: f64,
    prec: &Preconditioner,
    op: &SymmetricOperator,
    x: &[f64],
    g: &[f64],
    psi: &CompositePart,
) -> Result<MetricStep> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("step constant M must be positive, got {m}")));
    }
    if x.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: g.len() });
    }
    match psi {
        CompositePart::Zero => {
            let d = prec.apply(op, g)?;
            Ok(step_along(m, x, g, &d, prec.matvecs_per_apply()))
        }
        CompositePart::Custom(o) => o.step(m, prec, op, x, g),
        CompositePart::ValueOnly(_) => Err(Error::MissingProxOracle),
    }
}

/// `y = x - d / M` for a precomputed direction `d = P g`.
pub(crate) fn step_along(m: f64, x: &[f64], g: &[f64], d: &[f64], matvecs: u64) -> MetricStep {
    let y = x.iter().zip(d).map(|(xi, di)| xi - di / m).collect();
    let dist_sq_pinv = (dot(g, d) / (m * m)).max(0.0);
    MetricStep { y, dist_sq_pinv, matvecs }
}

/// `argmin <g, y> + psi(y) + (M/2)||y - x||^2_{P^-1}`; `x - P g / M` when `psi = 0`.
pub fn gradient_step(
    m: f64,
    prec: &Preconditioner,
    op: &SymmetricOperator,
    x: &[f64],
    g: &[f64],
    psi: &CompositePart,
) -> Result<Vec<f64>> {
    Ok(metric_step(m, prec, op, x, g, psi)?.y)
}
