//! Linear-operator abstraction and the handful of vector primitives the
//! solvers are built on.
//!
//! Vectors are plain `&[f64]` / `Vec<f64>`. Operators are either CSR sparse
//! or row-major dense and always support both `A·v` and `Aᵀ·u`; the transpose
//! is never materialized.

mod csr;
mod dense;
pub mod mmio;
mod operator;

pub use csr::CsrMatrix;
pub use dense::DenseMatrix;
pub use operator::LinearOperator;

use crate::error::{Error, Result};

/// Euclidean inner product.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dims("dot", u.len(), v.len()));
    }
    Ok(kernels::dot(u, v))
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    kernels::norm2(v)
}

/// `‖b − A·x‖ / ‖b‖`, or `‖A·x‖` when `b = 0`.
pub fn relative_residual(op: &LinearOperator, x: &[f64], b: &[f64]) -> Result<f64> {
    let r = residual(op, x, b)?;
    let bn = norm2(b);
    let rn = norm2(&r);
    Ok(if bn > 0.0 { rn / bn } else { rn })
}

/// `b − A·x`.
pub fn residual(op: &LinearOperator, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != op.nrows() {
        return Err(Error::dims("residual", op.nrows(), b.len()));
    }
    let mut r = op.apply(x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(r)
}

pub(crate) fn ensure_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} contains non-finite entries"
        )))
    }
}

/// Unchecked kernels used inside the hot loops. Callers guarantee lengths.
pub(crate) mod kernels {
    #[inline]
    pub fn dot(u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        u.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    #[inline]
    pub fn norm2(v: &[f64]) -> f64 {
        dot(v, v).sqrt()
    }

    /// y += a·x
    #[inline]
    pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), y.len());
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += a * xi;
        }
    }

    #[inline]
    pub fn scale(a: f64, x: &mut [f64]) {
        for xi in x {
            *xi *= a;
        }
    }

    pub fn is_finite(v: &[f64]) -> bool {
        v.iter().all(|x| x.is_finite())
    }
}
