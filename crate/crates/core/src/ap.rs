//! Block accumulated projection (AP).
//!
//! The rows of `A` are split into blocks `A_1 … A_k`. Starting from a
//! projection `p_0` of the unknown `x` with known `c_0 = xᵀp_0`, each block
//! projects `x` onto `ran([p_{i-1}, A_iᵀ])`. Only `Wᵀx = (c_{i-1}, b_i)` is
//! needed, so every projection is computable without knowing `x`, and the
//! error `‖x − p_i‖` never increases.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, kernels, LinearOperator};
use crate::solver::{SolveReport, Termination};

/// Columns whose Gram-Schmidt remainder falls below this fraction of `‖W‖_F`
/// are treated as dependent and dropped.
pub const RANK_TOL: f64 = 1e-12;

/// Contiguous row blocks `[boundaries[i], boundaries[i+1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    boundaries: Vec<usize>,
}

impl BlockPartition {
    /// `boundaries` must start at 0, end at `nrows` and increase strictly.
    pub fn new(boundaries: Vec<usize>, nrows: usize) -> Result<Self> {
        if boundaries.len() < 2
            || boundaries[0] != 0
            || *boundaries.last().unwrap() != nrows
            || boundaries.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidInput(format!(
                "block boundaries {boundaries:?} do not partition {nrows} rows"
            )));
        }
        Ok(Self { boundaries })
    }

    /// `blocks` equal blocks; the remainder rows go to the last one.
    pub fn contiguous(nrows: usize, blocks: usize) -> Result<Self> {
        if blocks == 0 || blocks > nrows {
            return Err(Error::InvalidInput(format!(
                "cannot split {nrows} rows into {blocks} blocks"
            )));
        }
        let size = nrows / blocks;
        let mut boundaries: Vec<usize> = (0..blocks).map(|i| i * size).collect();
        boundaries.push(nrows);
        Self::new(boundaries, nrows)
    }

    pub fn len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nrows(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }
}

/// Current projection `p` of the solution and `c = xᵀp`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApState {
    pub p: Vec<f64>,
    pub c: f64,
}

/// `p_0 = α Aᵀb` with `α = ‖b‖² / ‖Aᵀb‖²` and `c_0 = α ‖b‖²`.
pub fn ap_init(op: &LinearOperator, b: &[f64]) -> Result<ApState> {
    let mut p = op.apply_transpose(b)?;
    let atb2 = kernels::dot(&p, &p);
    if atb2 == 0.0 {
        return Err(Error::DegenerateSeed("Aᵀb vanishes"));
    }
    let b2 = kernels::dot(b, b);
    let alpha = b2 / atb2;
    kernels::scale(alpha, &mut p);
    Ok(ApState { p, c: alpha * b2 })
}

/// Orthogonal projection of the unknown `x` onto the span of `columns`, given
/// only `l = Wᵀx`.
///
/// Uses a thin QR `W = QR` built by twice-iterated Gram-Schmidt:
/// `p = Q R⁻ᵀ l` and `c = ‖R⁻ᵀ l‖²`.
pub fn project_onto(columns: &[Vec<f64>], l: &[f64]) -> Result<ApState> {
    if columns.len() != l.len() {
        return Err(Error::dims("projection data", columns.len(), l.len()));
    }
    let Some(n) = columns.first().map(Vec::len) else {
        return Err(Error::EmptySubspace);
    };
    if let Some(bad) = columns.iter().find(|c| c.len() != n) {
        return Err(Error::dims("projection column", n, bad.len()));
    }
    let w_frob = columns
        .iter()
        .map(|c| kernels::dot(c, c))
        .sum::<f64>()
        .sqrt();
    let threshold = RANK_TOL * w_frob;

    let mut q: Vec<Vec<f64>> = Vec::new();
    // r_cols[j] holds column j of R (entries 0..=j)
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut l_kept = Vec::new();
    for (col, &lj) in columns.iter().zip(l) {
        let mut v = col.clone();
        let mut coeffs = vec![0.0; q.len()];
        for _ in 0..2 {
            for (qi, ci) in q.iter().zip(coeffs.iter_mut()) {
                let h = kernels::dot(qi, &v);
                kernels::axpy(-h, qi, &mut v);
                *ci += h;
            }
        }
        let rjj = kernels::norm2(&v);
        if !(rjj > threshold) {
            continue;
        }
        kernels::scale(1.0 / rjj, &mut v);
        coeffs.push(rjj);
        q.push(v);
        r_cols.push(coeffs);
        l_kept.push(lj);
    }
    if q.is_empty() {
        return Err(Error::EmptySubspace);
    }

    // Rᵀ y = l by forward substitution
    let mut y = Vec::with_capacity(q.len());
    for (j, rc) in r_cols.iter().enumerate() {
        let s: f64 = rc[..j].iter().zip(&y).map(|(r, yi)| r * yi).sum();
        y.push((l_kept[j] - s) / rc[j]);
    }
    let mut p = vec![0.0; n];
    for (qj, yj) in q.iter().zip(&y) {
        kernels::axpy(*yj, qj, &mut p);
    }
    Ok(ApState {
        p,
        c: kernels::dot(&y, &y),
    })
}

/// One pass over all blocks.
pub fn ap_sweep(
    op: &LinearOperator,
    b: &[f64],
    partition: &BlockPartition,
    s: &ApState,
) -> Result<ApState> {
    if partition.nrows() != op.nrows() {
        return Err(Error::dims("partition rows", op.nrows(), partition.nrows()));
    }
    if b.len() != op.nrows() {
        return Err(Error::dims("rhs", op.nrows(), b.len()));
    }
    let mut state = s.clone();
    for block in partition.blocks() {
        let mut columns = Vec::with_capacity(block.len() + 1);
        let mut l = Vec::with_capacity(block.len() + 1);
        columns.push(std::mem::take(&mut state.p));
        l.push(state.c);
        for i in block {
            columns.push(op.row_dense(i));
            l.push(b[i]);
        }
        state = project_onto(&columns, &l)?;
    }
    Ok(state)
}

/// Repeats sweeps until the relative residual reaches `tol` or `max_sweeps`
/// sweeps have run. At least one sweep is always performed.
pub fn ap_solve(
    op: &LinearOperator,
    b: &[f64],
    partition: &BlockPartition,
    tol: f64,
    max_sweeps: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    if b.len() != op.nrows() {
        return Err(Error::dims("rhs", op.nrows(), b.len()));
    }
    ensure_finite(b, "right-hand side")?;
    let bnorm = kernels::norm2(b);
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; op.ncols()],
            SolveReport {
                termination: Termination::Converged,
                restarts: 0,
                inner_iterations: Vec::new(),
                final_relres: 0.0,
                residual_history: vec![0.0],
                breakdown_events: 0,
            },
        ));
    }
    let relres = |p: &[f64]| -> Result<f64> {
        let mut r = op.apply(p)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(kernels::norm2(&r) / bnorm)
    };

    let mut state = ap_init(op, b)?;
    let mut history = vec![relres(&state.p)?];
    let mut sweeps = 0;
    let termination = loop {
        state = ap_sweep(op, b, partition, &state)?;
        sweeps += 1;
        let rr = relres(&state.p)?;
        history.push(rr);
        if rr <= tol {
            break Termination::Converged;
        }
        if sweeps >= max_sweeps {
            break Termination::MaxRestarts;
        }
    };
    Ok((
        state.p,
        SolveReport {
            termination,
            restarts: sweeps,
            inner_iterations: vec![partition.len(); sweeps],
            final_relres: *history.last().unwrap(),
            residual_history: history,
            breakdown_events: 0,
        },
    ))
}
