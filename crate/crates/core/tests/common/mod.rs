#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oap::{DenseMatrix, LinearOperator};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

pub fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

pub fn to_na(op: &LinearOperator) -> DMatrix<f64> {
    let d = op.to_dense();
    DMatrix::from_row_slice(d.nrows(), d.ncols(), d.values())
}

pub fn from_na(m: &DMatrix<f64>) -> LinearOperator {
    let mut values = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            values.push(m[(i, j)]);
        }
    }
    DenseMatrix::new(m.nrows(), m.ncols(), values)
        .unwrap()
        .into()
}

pub fn random_vec(n: usize, rng: &mut Pcg64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_unit(n: usize, rng: &mut Pcg64) -> Vec<f64> {
    let mut v = random_vec(n, rng);
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn random_orthogonal(n: usize, rng: &mut Pcg64) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

/// `Q₁·diag(s)·Q₂ᵀ` with singular values spread over `[1, cond]`.
pub fn random_with_condition(n: usize, cond: f64, rng: &mut Pcg64) -> DMatrix<f64> {
    let q1 = random_orthogonal(n, rng);
    let q2 = random_orthogonal(n, rng);
    let s = DVector::from_fn(n, |i, _| cond.powf(i as f64 / (n - 1) as f64));
    q1 * DMatrix::from_diagonal(&s) * q2.transpose()
}

pub fn condition_2(m: &DMatrix<f64>) -> f64 {
    let s = m.singular_values();
    s.max() / s.min()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn relres(op: &LinearOperator, x: &[f64], b: &[f64]) -> f64 {
    norm(&sub(b, &op.apply(x).unwrap())) / norm(b)
}

/// Columns as an `n × k` matrix.
pub fn columns(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Largest entry of `|QᵀQ − I|`.
pub fn gram_error(cols: &[Vec<f64>]) -> f64 {
    let q = columns(cols);
    let g = q.transpose() * &q - DMatrix::identity(cols.len(), cols.len());
    g.amax()
}
