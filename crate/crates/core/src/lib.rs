//! Orthogonally accumulated projection (OAP) solvers for square, generally
//! unsymmetric linear systems `A·x = b`.
//!
//! The solvers build an orthonormal sequence `v_1, v_2, …` with short
//! Lanczos-like recurrences and, alongside it, the inner products
//! `c_k = xᵀv_k` with the unknown solution. Accumulating `Σ c_k v_k` recovers
//! `x`; when floating-point drift breaks orthogonality the process restarts on
//! the residual equation.
//!
//! - [`linalg`]: operators (CSR/dense), vector primitives, Matrix Market I/O.
//! - [`lanczos`]: two-sided tridiagonalization and bidiagonalization kernels.
//! - [`solver`]: seeds, coefficient updates, OAP cycles, restarted drivers.
//! - [`ap`]: the block accumulated-projection baseline.
//! - [`problems`]: deterministic test-problem generators.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ap;
pub mod error;
pub mod lanczos;
pub mod linalg;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{CsrMatrix, DenseMatrix, LinearOperator};
