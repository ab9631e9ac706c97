//! Short-recurrence orthogonal reductions.
//!
//! Two-sided tridiagonalization builds orthonormal `u_k`, `v_k` with
//! `UᵀAV = T` tridiagonal (diagonal `α`, superdiagonal `β`, subdiagonal `γ`):
//!
//! ```text
//! α_k     = u_kᵀ A v_k
//! w       = A v_k  − α_k u_k − β_{k-1} u_{k-1},   γ_k = ‖w‖,  u_{k+1} = w / γ_k
//! q       = Aᵀ u_k − α_k v_k − γ_{k-1} v_{k-1},   β_k = ‖q‖,  v_{k+1} = q / β_k
//! ```
//!
//! Bidiagonalization gives `UᵀAV` upper bidiagonal (diagonal `α`,
//! superdiagonal `β`). Step `k` yields `α_k, u_k, β_k, v_{k+1}`:
//!
//! ```text
//! w = A v_k − β_{k-1} u_{k-1},   α_k = ‖w‖,  u_k = w / α_k
//! q = Aᵀ u_k − α_k v_k,          β_k = ‖q‖,  v_{k+1} = q / β_k
//! ```
//!
//! The step functions only look at a two-vector window per side. [`Kernel`]
//! can additionally keep every basis vector and re-project new directions
//! against them (twice, classical Gram-Schmidt); that mode exists to test the
//! exact-arithmetic behavior at small sizes.

use crate::error::{Error, Result};
use crate::linalg::{kernels, LinearOperator};

/// Default relative breakdown threshold; a recurrence norm at or below
/// `DEFAULT_TAU_BREAK · ‖A‖_F` counts as zero.
pub const DEFAULT_TAU_BREAK: f64 = 1e-13;

/// Tolerance on `‖v‖ − 1` accepted for starting vectors.
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Tridiagonal,
    Bidiagonal,
}

/// Which recurrence norms vanished in a step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Breakdown {
    pub u_side: bool,
    pub v_side: bool,
}

impl Breakdown {
    pub fn any(self) -> bool {
        self.u_side || self.v_side
    }
}

/// Entries of the reduced matrix `T`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecurrenceCoefficients {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Subdiagonal of the tridiagonal form; empty in bidiagonal mode.
    pub gammas: Vec<f64>,
}

impl RecurrenceCoefficients {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }
}

/// Rolling window of the recurrence: `v_{k-1}, v_k, u_{k-1}, u_k` and the
/// previous off-diagonal scalars.
///
/// In bidiagonal mode `u_curr` stays zero: step `k` produces `u_k` itself.
#[derive(Debug, Clone)]
pub struct KrylovState {
    pub k: usize,
    pub mode: Mode,
    pub v_prev: Vec<f64>,
    pub v_curr: Vec<f64>,
    pub u_prev: Vec<f64>,
    pub u_curr: Vec<f64>,
    /// `β_{k-1}`, zero at `k = 1`.
    pub beta_prev: f64,
    /// `γ_{k-1}`, zero at `k = 1`.
    pub gamma_prev: f64,
    /// Cached `‖A‖_F`; breakdown thresholds are relative to it.
    pub scale: f64,
}

fn check_unit(v: &[f64], what: &'static str) -> Result<()> {
    let n = kernels::norm2(v);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::InvalidInput(format!(
            "{what} must be a unit vector (norm {n})"
        )));
    }
    Ok(())
}

impl KrylovState {
    pub fn tridiagonal(op: &LinearOperator, v1: &[f64], u1: &[f64]) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::dims(
                "tridiagonalization needs a square operator",
                op.nrows(),
                op.ncols(),
            ));
        }
        let n = op.ncols();
        if v1.len() != n {
            return Err(Error::dims("v1", n, v1.len()));
        }
        if u1.len() != n {
            return Err(Error::dims("u1", n, u1.len()));
        }
        check_unit(v1, "v1")?;
        check_unit(u1, "u1")?;
        Ok(Self {
            k: 1,
            mode: Mode::Tridiagonal,
            v_prev: vec![0.0; n],
            v_curr: v1.to_vec(),
            u_prev: vec![0.0; n],
            u_curr: u1.to_vec(),
            beta_prev: 0.0,
            gamma_prev: 0.0,
            scale: op.frobenius_norm(),
        })
    }

    pub fn bidiagonal(op: &LinearOperator, v1: &[f64]) -> Result<Self> {
        if v1.len() != op.ncols() {
            return Err(Error::dims("v1", op.ncols(), v1.len()));
        }
        check_unit(v1, "v1")?;
        Ok(Self {
            k: 1,
            mode: Mode::Bidiagonal,
            v_prev: vec![0.0; op.ncols()],
            v_curr: v1.to_vec(),
            u_prev: vec![0.0; op.nrows()],
            u_curr: vec![0.0; op.nrows()],
            beta_prev: 0.0,
            gamma_prev: 0.0,
            scale: op.frobenius_norm(),
        })
    }

    /// Shifts the window by one step using `out`.
    pub fn advance(&mut self, out: StepOutcome) {
        match self.mode {
            Mode::Tridiagonal => {
                self.v_prev = std::mem::replace(&mut self.v_curr, out.next_v);
                self.u_prev = std::mem::replace(&mut self.u_curr, out.next_u);
                self.gamma_prev = out.gamma;
            }
            Mode::Bidiagonal => {
                self.v_prev = std::mem::replace(&mut self.v_curr, out.next_v);
                self.u_prev = out.next_u;
            }
        }
        self.beta_prev = out.beta;
        self.k += 1;
    }
}

/// Result of one recurrence step.
///
/// Scalars are reported as computed; a side that broke down carries a zero
/// vector.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// `v_{k+1}`.
    pub next_v: Vec<f64>,
    /// `u_{k+1}` (tridiagonal) or `u_k` (bidiagonal).
    pub next_u: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Always zero in bidiagonal mode.
    pub gamma: f64,
    pub breakdown: Breakdown,
    /// `A·v_k`, a by-product of the step.
    pub av: Vec<f64>,
}

/// Full bases kept for reorthogonalization.
#[derive(Debug, Clone, Default)]
struct Basis {
    v: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
}

/// Removes the components of `x` along the orthonormal `basis`, twice.
fn reproject(x: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|b| kernels::dot(b, x)).collect();
        for (b, c) in basis.iter().zip(coeffs) {
            kernels::axpy(-c, b, x);
        }
    }
}

/// Normalizes `x` in place unless its norm is at or below `threshold`, in
/// which case it is zeroed. Returns the norm and whether it broke down.
fn normalize(x: &mut [f64], threshold: f64) -> (f64, bool) {
    let nrm = kernels::norm2(x);
    if nrm <= threshold {
        x.iter_mut().for_each(|v| *v = 0.0);
        (nrm, true)
    } else {
        kernels::scale(1.0 / nrm, x);
        (nrm, false)
    }
}

fn check_finite(k: usize, scalars: &[f64], vecs: &[&[f64]]) -> Result<()> {
    if scalars.iter().all(|s| s.is_finite()) && vecs.iter().all(|v| kernels::is_finite(v)) {
        Ok(())
    } else {
        Err(Error::NumericalOverflow { step: k })
    }
}

fn tridiag_step_impl(
    op: &LinearOperator,
    s: &KrylovState,
    tau_break: f64,
    basis: Option<&Basis>,
) -> Result<StepOutcome> {
    if s.mode != Mode::Tridiagonal {
        return Err(Error::InvalidInput(
            "tridiagonal step on a bidiagonal state".into(),
        ));
    }
    let threshold = tau_break * s.scale;

    let mut w = op.apply(&s.v_curr)?;
    let av = w.clone();
    let alpha = kernels::dot(&s.u_curr, &w);
    kernels::axpy(-alpha, &s.u_curr, &mut w);
    kernels::axpy(-s.beta_prev, &s.u_prev, &mut w);
    if let Some(b) = basis {
        reproject(&mut w, &b.u);
    }
    let (gamma, u_broke) = normalize(&mut w, threshold);

    let mut q = op.apply_transpose(&s.u_curr)?;
    kernels::axpy(-alpha, &s.v_curr, &mut q);
    kernels::axpy(-s.gamma_prev, &s.v_prev, &mut q);
    if let Some(b) = basis {
        reproject(&mut q, &b.v);
    }
    let (beta, v_broke) = normalize(&mut q, threshold);

    check_finite(s.k, &[alpha, beta, gamma], &[&w, &q])?;
    Ok(StepOutcome {
        next_v: q,
        next_u: w,
        alpha,
        beta,
        gamma,
        breakdown: Breakdown {
            u_side: u_broke,
            v_side: v_broke,
        },
        av,
    })
}

fn bidiag_step_impl(
    op: &LinearOperator,
    s: &KrylovState,
    tau_break: f64,
    basis: Option<&Basis>,
) -> Result<StepOutcome> {
    if s.mode != Mode::Bidiagonal {
        return Err(Error::InvalidInput(
            "bidiagonal step on a tridiagonal state".into(),
        ));
    }
    let threshold = tau_break * s.scale;

    let mut w = op.apply(&s.v_curr)?;
    let av = w.clone();
    kernels::axpy(-s.beta_prev, &s.u_prev, &mut w);
    if let Some(b) = basis {
        reproject(&mut w, &b.u);
    }
    let (alpha, u_broke) = normalize(&mut w, threshold);
    if u_broke {
        // without u_k there is no v-side direction to build
        check_finite(s.k, &[alpha], &[])?;
        return Ok(StepOutcome {
            next_v: vec![0.0; op.ncols()],
            next_u: w,
            alpha,
            beta: 0.0,
            gamma: 0.0,
            breakdown: Breakdown {
                u_side: true,
                v_side: true,
            },
            av,
        });
    }

    let mut q = op.apply_transpose(&w)?;
    kernels::axpy(-alpha, &s.v_curr, &mut q);
    if let Some(b) = basis {
        reproject(&mut q, &b.v);
    }
    let (beta, v_broke) = normalize(&mut q, threshold);

    check_finite(s.k, &[alpha, beta], &[&w, &q])?;
    Ok(StepOutcome {
        next_v: q,
        next_u: w,
        alpha,
        beta,
        gamma: 0.0,
        breakdown: Breakdown {
            u_side: false,
            v_side: v_broke,
        },
        av,
    })
}

/// One step of two-sided tridiagonalization from state `s`.
pub fn tridiag_step(op: &LinearOperator, s: &KrylovState, tau_break: f64) -> Result<StepOutcome> {
    tridiag_step_impl(op, s, tau_break, None)
}

/// One step of bidiagonalization from state `s`.
pub fn bidiag_step(op: &LinearOperator, s: &KrylovState, tau_break: f64) -> Result<StepOutcome> {
    bidiag_step_impl(op, s, tau_break, None)
}

/// A step engine bound to an operator, optionally reorthogonalizing.
///
/// Without reorthogonalization it holds only the [`KrylovState`] window.
#[derive(Debug, Clone)]
pub struct Kernel<'a> {
    op: &'a LinearOperator,
    state: KrylovState,
    tau_break: f64,
    basis: Option<Basis>,
}

impl<'a> Kernel<'a> {
    pub fn tridiagonal(
        op: &'a LinearOperator,
        v1: &[f64],
        u1: &[f64],
        tau_break: f64,
        reorthogonalize: bool,
    ) -> Result<Self> {
        let state = KrylovState::tridiagonal(op, v1, u1)?;
        let basis = reorthogonalize.then(|| Basis {
            v: vec![v1.to_vec()],
            u: vec![u1.to_vec()],
        });
        Ok(Self {
            op,
            state,
            tau_break,
            basis,
        })
    }

    pub fn bidiagonal(
        op: &'a LinearOperator,
        v1: &[f64],
        tau_break: f64,
        reorthogonalize: bool,
    ) -> Result<Self> {
        let state = KrylovState::bidiagonal(op, v1)?;
        let basis = reorthogonalize.then(|| Basis {
            v: vec![v1.to_vec()],
            u: Vec::new(),
        });
        Ok(Self {
            op,
            state,
            tau_break,
            basis,
        })
    }

    pub fn op(&self) -> &'a LinearOperator {
        self.op
    }

    pub fn mode(&self) -> Mode {
        self.state.mode
    }

    pub fn state(&self) -> &KrylovState {
        &self.state
    }

    /// Computes the next step without moving the window.
    pub fn step(&self) -> Result<StepOutcome> {
        match self.state.mode {
            Mode::Tridiagonal => {
                tridiag_step_impl(self.op, &self.state, self.tau_break, self.basis.as_ref())
            }
            Mode::Bidiagonal => {
                bidiag_step_impl(self.op, &self.state, self.tau_break, self.basis.as_ref())
            }
        }
    }

    pub fn advance(&mut self, out: StepOutcome) {
        if let Some(b) = self.basis.as_mut() {
            if !out.breakdown.u_side {
                b.u.push(out.next_u.clone());
            }
            if !out.breakdown.v_side {
                b.v.push(out.next_v.clone());
            }
        }
        self.state.advance(out);
    }
}

/// Output of a full reduction run.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub coeffs: RecurrenceCoefficients,
    /// Columns `v_1, v_2, …`.
    pub v: Vec<Vec<f64>>,
    /// Columns `u_1, u_2, …`.
    pub u: Vec<Vec<f64>>,
    /// Step at which a breakdown stopped the run.
    pub breakdown_step: Option<usize>,
}

fn reduce(mut kernel: Kernel<'_>, steps: usize) -> Result<Reduction> {
    let mode = kernel.mode();
    let mut coeffs = RecurrenceCoefficients::default();
    let mut v = vec![kernel.state.v_curr.clone()];
    let mut u = match mode {
        Mode::Tridiagonal => vec![kernel.state.u_curr.clone()],
        Mode::Bidiagonal => Vec::new(),
    };
    let mut breakdown_step = None;
    for _ in 0..steps {
        let k = kernel.state.k;
        let out = kernel.step()?;
        coeffs.alphas.push(out.alpha);
        coeffs.betas.push(out.beta);
        if mode == Mode::Tridiagonal {
            coeffs.gammas.push(out.gamma);
        }
        if out.breakdown.any() {
            if mode == Mode::Bidiagonal && !out.breakdown.u_side {
                u.push(out.next_u);
            }
            breakdown_step = Some(k);
            break;
        }
        v.push(out.next_v.clone());
        u.push(out.next_u.clone());
        kernel.advance(out);
    }
    Ok(Reduction {
        coeffs,
        v,
        u,
        breakdown_step,
    })
}

/// Runs `steps` tridiagonalization steps and keeps the full bases.
///
/// After `s` unbroken steps `v` and `u` each hold `s + 1` columns.
pub fn tridiagonalize(
    op: &LinearOperator,
    v1: &[f64],
    u1: &[f64],
    steps: usize,
    reorthogonalize: bool,
    tau_break: f64,
) -> Result<Reduction> {
    let kernel = Kernel::tridiagonal(op, v1, u1, tau_break, reorthogonalize)?;
    reduce(kernel, steps)
}

/// Runs `steps` bidiagonalization steps and keeps the full bases.
///
/// After `s` unbroken steps `u` holds `s` columns and `v` holds `s + 1`.
pub fn bidiagonalize(
    op: &LinearOperator,
    v1: &[f64],
    steps: usize,
    reorthogonalize: bool,
    tau_break: f64,
) -> Result<Reduction> {
    let kernel = Kernel::bidiagonal(op, v1, tau_break, reorthogonalize)?;
    reduce(kernel, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, DenseMatrix};

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    fn dense(rows: &[Vec<f64>]) -> LinearOperator {
        DenseMatrix::from_rows(rows).unwrap().into()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn tridiag_identity_breaks_down_on_u_side() {
        let a: LinearOperator = CsrMatrix::identity(3).into();
        let s = KrylovState::tridiagonal(&a, &e(3, 0), &e(3, 0)).unwrap();
        let out = tridiag_step(&a, &s, DEFAULT_TAU_BREAK).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.gamma, 0.0);
        assert!(out.breakdown.u_side);
        assert!(out.next_u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tridiag_swap_matrix() {
        let a = dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = KrylovState::tridiagonal(&a, &e(2, 0), &e(2, 0)).unwrap();
        let out = tridiag_step(&a, &s, DEFAULT_TAU_BREAK).unwrap();
        assert_eq!(out.alpha, 0.0);
        assert!((out.gamma - 1.0).abs() < 1e-15);
        assert!((out.beta - 1.0).abs() < 1e-15);
        assert!(close(&out.next_u, &e(2, 1), 1e-15));
        assert!(close(&out.next_v, &e(2, 1), 1e-15));
        assert!(!out.breakdown.any());
    }

    #[test]
    fn bidiag_identity_breaks_down_on_v_side() {
        let a: LinearOperator = CsrMatrix::identity(2).into();
        let s = KrylovState::bidiagonal(&a, &e(2, 0)).unwrap();
        let out = bidiag_step(&a, &s, DEFAULT_TAU_BREAK).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert!(close(&out.next_u, &e(2, 0), 0.0));
        assert!(!out.breakdown.u_side);
        assert!(out.breakdown.v_side);
    }

    #[test]
    fn bidiag_shear_matrix() {
        let a = dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let s = KrylovState::bidiagonal(&a, &e(2, 0)).unwrap();
        let out = bidiag_step(&a, &s, DEFAULT_TAU_BREAK).unwrap();
        assert_eq!(out.alpha, 1.0);
        assert!(close(&out.next_u, &e(2, 0), 1e-15));
        assert!((out.beta - 1.0).abs() < 1e-15);
        assert!(close(&out.next_v, &e(2, 1), 1e-15));
    }

    #[test]
    fn identity_reduction_stops_at_first_step() {
        let a: LinearOperator = CsrMatrix::identity(4).into();
        let red = tridiagonalize(&a, &e(4, 1), &e(4, 1), 3, false, DEFAULT_TAU_BREAK).unwrap();
        assert_eq!(red.breakdown_step, Some(1));
        let red = bidiagonalize(&a, &e(4, 1), 3, true, DEFAULT_TAU_BREAK).unwrap();
        assert_eq!(red.breakdown_step, Some(1));
    }

    #[test]
    fn rejects_non_unit_start() {
        let a: LinearOperator = CsrMatrix::identity(2).into();
        assert!(KrylovState::tridiagonal(&a, &[1.0, 1.0], &e(2, 0)).is_err());
        assert!(KrylovState::bidiagonal(&a, &[0.5, 0.0]).is_err());
        assert!(KrylovState::bidiagonal(&a, &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn overflow_is_reported_with_step() {
        let a = dense(&[vec![1e308, 1e308], vec![1e308, 1e308]]);
        let s = KrylovState::tridiagonal(&a, &e(2, 0), &e(2, 1)).unwrap();
        match tridiag_step(&a, &s, DEFAULT_TAU_BREAK) {
            Err(Error::NumericalOverflow { step }) => assert_eq!(step, 1),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let a: LinearOperator = CsrMatrix::identity(2).into();
        let s = KrylovState::bidiagonal(&a, &e(2, 0)).unwrap();
        assert!(tridiag_step(&a, &s, DEFAULT_TAU_BREAK).is_err());
    }
}
