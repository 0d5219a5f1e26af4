//! Polynomial preconditioning for first-order convex optimization.
//!
//! The crate is organised bottom-up:
//!
//! - [`operators`]: matrix-free symmetric operators, a dense fallback with a
//!   Jacobi eigensolver, traces, Horner application of polynomials and
//!   elementary symmetric polynomials.
//! - [`preconditioners`]: the symmetric polynomial family `P_tau`, Chebyshev
//!   and eigenvalue-cutting polynomials, and their quality measures.
//! - [`problems`]: composite objectives (quadratic, Huber and logistic
//!   regression) together with the metric gradient step.
//! - [`solvers`]: the preconditioned gradient method and fast gradient method,
//!   with fixed steps or adaptive backtracking.
//! - [`krylov`]: the gradient method that picks the best polynomial step in a
//!   Krylov subspace every iteration.
//! - [`diagnostics`]: numerical verifiers for the spectral identities and the
//!   convergence-rate envelopes.
//! - [`experiments`]: libsvm ingestion, synthetic problems, CSV/JSON output and
//!   the benchmark driver behind the `polyprec` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense kernels index several arrays with one loop variable.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod operators;
pub mod preconditioners;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use operators::{DenseMatrix, PolynomialCoefficients, SymmetricOperator};
pub use preconditioners::{Descriptor, Preconditioner, QualityBounds, TraceMode};
pub use problems::{CompositeObjective, CompositePart};
pub use solvers::{RunResult, SolverConfig, StopRule, Termination};
