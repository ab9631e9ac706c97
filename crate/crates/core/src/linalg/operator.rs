use super::{CsrMatrix, DenseMatrix};
use crate::error::{Error, Result};

/// The coefficient matrix of `A·x = b`, sparse or dense.
///
/// Immutable once built, so one operator can be shared by concurrent solves.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOperator {
    Csr(CsrMatrix),
    Dense(DenseMatrix),
}

impl From<CsrMatrix> for LinearOperator {
    fn from(m: CsrMatrix) -> Self {
        LinearOperator::Csr(m)
    }
}

impl From<DenseMatrix> for LinearOperator {
    fn from(m: DenseMatrix) -> Self {
        LinearOperator::Dense(m)
    }
}

impl LinearOperator {
    pub fn nrows(&self) -> usize {
        match self {
            LinearOperator::Csr(m) => m.nrows(),
            LinearOperator::Dense(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            LinearOperator::Csr(m) => m.ncols(),
            LinearOperator::Dense(m) => m.ncols(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Returns `A·v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows()];
        self.apply_into(v, &mut y)?;
        Ok(y)
    }

    /// Returns `Aᵀ·u`.
    pub fn apply_transpose(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.ncols()];
        self.apply_transpose_into(u, &mut y)?;
        Ok(y)
    }

    /// Writes `A·v` into `out`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.ncols() {
            return Err(Error::dims("apply input", self.ncols(), v.len()));
        }
        if out.len() != self.nrows() {
            return Err(Error::dims("apply output", self.nrows(), out.len()));
        }
        match self {
            LinearOperator::Csr(m) => m.mul_into(v, out),
            LinearOperator::Dense(m) => m.mul_into(v, out),
        }
        Ok(())
    }

    /// Writes `Aᵀ·u` into `out`.
    pub fn apply_transpose_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        if u.len() != self.nrows() {
            return Err(Error::dims("apply_transpose input", self.nrows(), u.len()));
        }
        if out.len() != self.ncols() {
            return Err(Error::dims(
                "apply_transpose output",
                self.ncols(),
                out.len(),
            ));
        }
        match self {
            LinearOperator::Csr(m) => m.mul_transpose_into(u, out),
            LinearOperator::Dense(m) => m.mul_transpose_into(u, out),
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            LinearOperator::Csr(m) => m.frobenius_norm(),
            LinearOperator::Dense(m) => m.frobenius_norm(),
        }
    }

    /// Row `i` as a dense vector of length `ncols`.
    pub fn row_dense(&self, i: usize) -> Vec<f64> {
        match self {
            LinearOperator::Csr(m) => {
                let mut row = vec![0.0; m.ncols()];
                let (cols, vals) = m.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    row[j] = v;
                }
                row
            }
            LinearOperator::Dense(m) => m.row(i).to_vec(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            LinearOperator::Csr(m) => m.get(i, j),
            LinearOperator::Dense(m) => m.get(i, j),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            LinearOperator::Dense(m) => m.clone(),
            LinearOperator::Csr(m) => {
                let mut d = DenseMatrix::zeros(m.nrows(), m.ncols());
                for (i, j, v) in m.triplets() {
                    d.set(i, j, v);
                }
                d
            }
        }
    }

    /// Largest absolute entry of `A − Aᵀ`; `None` for rectangular operators.
    pub fn asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let n = self.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        Some(worst)
    }
}
