//! Orthogonally accumulated projection solvers.
//!
//! A cycle starts from a unit vector `v_1` with known `c_1 = xᵀv_1` and runs
//! one of the reduction kernels. Every new direction `v_{k+1}` comes with its
//! coefficient `c_{k+1} = xᵀv_{k+1}`, computed from the recurrence and
//! `bᵀu_k` alone, so `x_k = Σ c_i v_i` converges to `x` while the `v_i` stay
//! orthogonal. When the next direction is no longer orthogonal to the
//! accumulated `x_k` the cycle stops, and the restarted drivers solve the
//! residual equation `A·e = r` with a fresh cycle.

use crate::error::{Error, Result};
use crate::lanczos::{Kernel, DEFAULT_TAU_BREAK};
use crate::linalg::{ensure_finite, kernels, LinearOperator};

/// Which reduction kernel a solver runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Bidiagonalization based.
    Bidiagonal,
    /// Two-sided tridiagonalization based, started with `u_1 = v_1`.
    Tridiagonal,
}

/// Right-hand side used inside restart cycles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RhsMode {
    /// Each cycle solves `A·e = r` for the current residual `r`.
    #[default]
    CycleResidual,
    /// Keeps the original `b` in the seed and in `bᵀu_k`. Only the first
    /// cycle is consistent in this mode; later cycles usually stagnate.
    OriginalB,
}

/// What a cycle hands back to the restart driver.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CycleUpdate {
    /// The full `x_k` accumulated when the cycle stops. After a runaway of
    /// the coefficient recurrence ([`StopCause::ResidualGrowth`]) the longest
    /// prefix with residual `≤ ‖rhs‖` is used instead, or failing that the
    /// prefix with the smallest residual.
    #[default]
    Full,
    /// The longest prefix with residual `≤ ‖rhs‖`. If there is none, the
    /// residual-minimizing multiple `θ·x_k` (after a regular stop) or zero
    /// (after a runaway). Restart residuals then never increase.
    Safeguarded,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Target relative residual `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    /// Largest accepted `|x_kᵀ v_{k+1}| / ‖x_k‖` before a cycle stops.
    pub orth_tol: f64,
    /// Relative breakdown threshold for the kernels.
    pub tau_break: f64,
    /// Cap on restart cycles, `n` when unset.
    pub max_restarts: Option<usize>,
    /// Cap on kernel steps per cycle, `n − 1` when unset.
    pub max_inner: Option<usize>,
    pub rhs_mode: RhsMode,
    /// Keep full bases and reorthogonalize (small test problems only).
    pub reorthogonalize: bool,
    /// A cycle stops once its tracked residual exceeds this multiple of the
    /// residual it started from.
    pub growth_limit: f64,
    pub update: CycleUpdate,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            orth_tol: 1e-8,
            tau_break: DEFAULT_TAU_BREAK,
            max_restarts: None,
            max_inner: None,
            rhs_mode: RhsMode::CycleResidual,
            reorthogonalize: false,
            growth_limit: 1e6,
            update: CycleUpdate::Full,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.orth_tol > 0.0 && self.orth_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "orth_tol must lie in (0, 1), got {}",
                self.orth_tol
            )));
        }
        if !(self.tau_break > 0.0) {
            return Err(Error::InvalidInput("tau_break must be positive".into()));
        }
        if !(self.growth_limit >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "growth_limit must be at least 1, got {}",
                self.growth_limit
            )));
        }
        if self.max_inner == Some(0) {
            return Err(Error::InvalidInput("max_inner must be at least 1".into()));
        }
        Ok(())
    }

    fn inner_cap(&self, n: usize) -> usize {
        self.max_inner.unwrap_or(n.saturating_sub(1).max(1))
    }

    fn restart_cap(&self, n: usize) -> usize {
        self.max_restarts.unwrap_or(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxRestarts,
    Stagnation,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxRestarts => "max-restarts",
            Termination::Stagnation => "stagnation",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub termination: Termination,
    /// Number of cycles (or sweeps) run.
    pub restarts: usize,
    /// Terms accumulated in each cycle.
    pub inner_iterations: Vec<usize>,
    pub final_relres: f64,
    /// Relative residual at the start and after every cycle.
    pub residual_history: Vec<f64>,
    /// Cycles that ended on a kernel breakdown.
    pub breakdown_events: usize,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn total_inner(&self) -> usize {
        self.inner_iterations.iter().sum()
    }
}

/// Starting direction and its coefficient against the unknown solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub v1: Vec<f64>,
    pub c1: f64,
}

fn seed_from_vector(op: &LinearOperator, rhs: &[f64], w: &[f64], tau_break: f64) -> Result<Seed> {
    if rhs.len() != op.nrows() {
        return Err(Error::dims("seed rhs", op.nrows(), rhs.len()));
    }
    let mut v1 = op.apply_transpose(w)?;
    let norm = kernels::norm2(&v1);
    if !(norm > tau_break * op.frobenius_norm()) {
        return Err(Error::DegenerateSeed("Aᵀw vanishes"));
    }
    let t = 1.0 / norm;
    kernels::scale(t, &mut v1);
    Ok(Seed {
        v1,
        c1: t * kernels::dot(rhs, w),
    })
}

/// Seed `v_1 = Aᵀw / ‖Aᵀw‖`, `c_1 = rhsᵀw / ‖Aᵀw‖`.
pub fn init_from_vector(op: &LinearOperator, rhs: &[f64], w: &[f64]) -> Result<Seed> {
    seed_from_vector(op, rhs, w, DEFAULT_TAU_BREAK)
}

/// Seed from row `i`: `v_1 = A_iᵀ / ‖A_i‖`, `c_1 = rhs_i / ‖A_i‖`.
pub fn init_from_row(op: &LinearOperator, rhs: &[f64], i: usize) -> Result<Seed> {
    if rhs.len() != op.nrows() {
        return Err(Error::dims("seed rhs", op.nrows(), rhs.len()));
    }
    if i >= op.nrows() {
        return Err(Error::InvalidInput(format!(
            "row {i} out of range for {} rows",
            op.nrows()
        )));
    }
    let mut v1 = op.row_dense(i);
    let norm = kernels::norm2(&v1);
    if !(norm > DEFAULT_TAU_BREAK * op.frobenius_norm()) {
        return Err(Error::DegenerateSeed("row is zero"));
    }
    kernels::scale(1.0 / norm, &mut v1);
    Ok(Seed {
        v1,
        c1: rhs[i] / norm,
    })
}

/// `c_{k+1} = (bᵀu_k − α_k c_k − γ_{k-1} c_{k-1}) / β_k`
pub fn c_update_tridiag(
    b_dot_u: f64,
    alpha: f64,
    beta: f64,
    gamma_prev: f64,
    c_k: f64,
    c_prev: f64,
) -> f64 {
    (b_dot_u - alpha * c_k - gamma_prev * c_prev) / beta
}

/// `c_{k+1} = (bᵀu_k − α_k c_k) / β_k`
pub fn c_update_bidiag(b_dot_u: f64, alpha: f64, beta: f64, c_k: f64) -> f64 {
    (b_dot_u - alpha * c_k) / beta
}

/// `|x_kᵀ v| / ‖x_k‖`, zero when `x_k = 0`.
pub fn orthogonality_cosine(x_k: &[f64], v_next: &[f64]) -> f64 {
    let xn = kernels::norm2(x_k);
    if xn > 0.0 {
        kernels::dot(x_k, v_next).abs() / xn
    } else {
        0.0
    }
}

/// True when the unit vector `v_next` is no longer orthogonal to `x_k` within
/// `orth_tol` (cosine of the angle between them). Never fires for `x_k = 0`.
pub fn orthogonality_lost(x_k: &[f64], v_next: &[f64], orth_tol: f64) -> bool {
    orthogonality_cosine(x_k, v_next) > orth_tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    /// The detector saw `v_{k+1}` leave the orthogonal complement of `x_k`.
    Orthogonality,
    /// A recurrence norm vanished.
    Breakdown,
    /// The tracked residual rose above `growth_limit` times the cycle's
    /// starting residual.
    ResidualGrowth,
    /// The inner step cap was reached.
    Exhausted,
}

/// Result of a single OAP cycle.
#[derive(Debug, Clone)]
pub struct CycleOutcome {
    /// `x_j = Σ_{i≤j} c_i v_i` for the returned prefix `j = kept`.
    pub x: Vec<f64>,
    /// Number of accumulated terms `k`.
    pub inner_steps: usize,
    /// Length of the prefix returned in `x` (see [`CycleUpdate`]); zero when
    /// `x = 0`.
    pub kept: usize,
    /// `‖rhs − A·x‖` for the returned `x`, tracked through the recurrence.
    pub residual: f64,
    pub stop: StopCause,
    /// `c_1 … c_k` of the accepted terms.
    pub coefficients: Vec<f64>,
    /// Largest detector cosine among accepted updates.
    pub max_cosine: f64,
}

/// Accumulated approximation and coefficient window of a running cycle.
///
/// Alongside `x_k` it carries `A·x_k`, updated from the `A·v_k` every
/// kernel step produces anyway. The coefficient recurrence can be unstable
/// while the `v_k` remain orthogonal; the tracked residual exposes that.
#[derive(Debug, Clone)]
pub struct OapState<'a> {
    kernel: Kernel<'a>,
    rhs: &'a [f64],
    pub x: Vec<f64>,
    pub c_prev: f64,
    pub c_curr: f64,
    coefficients: Vec<f64>,
    max_cosine: f64,
    orth_tol: f64,
    growth_limit: f64,
    /// `A·x_{k-1}`; the newest term is folded in by the next step.
    ax: Vec<f64>,
    folded: usize,
    rhs_norm: f64,
    /// Residual and length of the longest prefix with residual `≤ ‖rhs‖`.
    accepted: Option<(f64, usize)>,
    x_accepted: Vec<f64>,
    /// Residual and length of the prefix with the smallest residual.
    best: Option<(f64, usize)>,
    x_best: Vec<f64>,
    last_residual: f64,
    update: CycleUpdate,
}

impl<'a> OapState<'a> {
    fn new(kernel: Kernel<'a>, rhs: &'a [f64], c1: f64, opts: &SolveOptions) -> Self {
        let mut x = kernel.state().v_curr.clone();
        kernels::scale(c1, &mut x);
        let n = x.len();
        let rhs_norm = kernels::norm2(rhs);
        Self {
            kernel,
            rhs,
            x,
            c_prev: 0.0,
            c_curr: c1,
            coefficients: vec![c1],
            max_cosine: 0.0,
            orth_tol: opts.orth_tol,
            growth_limit: opts.growth_limit,
            ax: vec![0.0; rhs.len()],
            folded: 0,
            rhs_norm,
            accepted: None,
            x_accepted: vec![0.0; n],
            best: None,
            x_best: vec![0.0; n],
            last_residual: rhs_norm,
            update: opts.update,
        }
    }

    /// Folds `c_k·A·v_k` into `A·x` and updates the prefix candidates.
    /// Returns the residual of `x_k`.
    fn settle(&mut self, av: &[f64]) -> f64 {
        kernels::axpy(self.c_curr, av, &mut self.ax);
        self.folded += 1;
        let res = self
            .rhs
            .iter()
            .zip(&self.ax)
            .map(|(r, a)| (r - a) * (r - a))
            .sum::<f64>()
            .sqrt();
        if res <= self.rhs_norm {
            self.accepted = Some((res, self.coefficients.len()));
            self.x_accepted.copy_from_slice(&self.x);
        }
        if self.update == CycleUpdate::Full && self.best.is_none_or(|(r, _)| res < r) {
            self.best = Some((res, self.coefficients.len()));
            self.x_best.copy_from_slice(&self.x);
        }
        self.last_residual = res;
        res
    }

    /// Advances by one kernel step. Returns the stop cause if the cycle ends.
    pub fn step(&mut self) -> Result<Option<StopCause>> {
        let k = self.kernel.state().k;
        let out = self.kernel.step()?;
        let res = self.settle(&out.av);
        if !res.is_finite() {
            return Err(Error::NumericalOverflow { step: k });
        }
        if res > self.growth_limit * self.rhs_norm {
            return Ok(Some(StopCause::ResidualGrowth));
        }
        if out.breakdown.v_side {
            return Ok(Some(StopCause::Breakdown));
        }
        let c_next = match self.kernel.mode() {
            crate::lanczos::Mode::Tridiagonal => {
                let s = self.kernel.state();
                c_update_tridiag(
                    kernels::dot(self.rhs, &s.u_curr),
                    out.alpha,
                    out.beta,
                    s.gamma_prev,
                    self.c_curr,
                    self.c_prev,
                )
            }
            crate::lanczos::Mode::Bidiagonal => c_update_bidiag(
                kernels::dot(self.rhs, &out.next_u),
                out.alpha,
                out.beta,
                self.c_curr,
            ),
        };
        if !c_next.is_finite() {
            return Err(Error::NumericalOverflow { step: k });
        }
        let cosine = orthogonality_cosine(&self.x, &out.next_v);
        if cosine > self.orth_tol {
            return Ok(Some(StopCause::Orthogonality));
        }
        self.max_cosine = self.max_cosine.max(cosine);
        kernels::axpy(c_next, &out.next_v, &mut self.x);
        self.coefficients.push(c_next);
        self.c_prev = self.c_curr;
        self.c_curr = c_next;
        let u_broke = out.breakdown.u_side;
        self.kernel.advance(out);
        Ok(u_broke.then_some(StopCause::Breakdown))
    }

    fn run(mut self, max_steps: usize) -> Result<CycleOutcome> {
        let mut stop = StopCause::Exhausted;
        for _ in 0..max_steps {
            if let Some(cause) = self.step()? {
                stop = cause;
                break;
            }
        }
        if self.folded < self.coefficients.len() {
            // the newest term has not been through a kernel step yet
            let av = self.kernel.op().apply(&self.kernel.state().v_curr)?;
            self.settle(&av);
        }
        let k = self.coefficients.len();
        let runaway = stop == StopCause::ResidualGrowth;
        let (x, residual, kept) = match (self.update, self.accepted) {
            (CycleUpdate::Full, _) if !runaway => (self.x, self.last_residual, k),
            (_, Some((res, j))) => (self.x_accepted, res, j),
            (CycleUpdate::Full, None) => match self.best {
                Some((res, j)) => (self.x_best, res, j),
                None => (vec![0.0; self.x.len()], self.rhs_norm, 0),
            },
            (CycleUpdate::Safeguarded, None) => {
                // θ = rhsᵀAx_k / ‖Ax_k‖²
                let aa = kernels::dot(&self.ax, &self.ax);
                let ra = kernels::dot(self.rhs, &self.ax);
                let mut x = self.x;
                if aa > 0.0 && !runaway {
                    kernels::scale(ra / aa, &mut x);
                    let res2 = self.rhs_norm * self.rhs_norm - ra * ra / aa;
                    (x, res2.max(0.0).sqrt(), k)
                } else {
                    x.iter_mut().for_each(|v| *v = 0.0);
                    (x, self.rhs_norm, 0)
                }
            }
        };
        Ok(CycleOutcome {
            x,
            inner_steps: k,
            kept,
            residual,
            stop,
            coefficients: self.coefficients,
            max_cosine: self.max_cosine,
        })
    }
}

fn check_cycle_inputs(op: &LinearOperator, rhs: &[f64], opts: &SolveOptions) -> Result<()> {
    opts.validate()?;
    if !op.is_square() {
        return Err(Error::dims("square operator", op.nrows(), op.ncols()));
    }
    if rhs.len() != op.nrows() {
        return Err(Error::dims("rhs", op.nrows(), rhs.len()));
    }
    Ok(())
}

/// One OAP cycle on the tridiagonalization kernel.
pub fn oap_cycle_tridiag(
    op: &LinearOperator,
    rhs: &[f64],
    v1: &[f64],
    u1: &[f64],
    c1: f64,
    opts: &SolveOptions,
) -> Result<CycleOutcome> {
    check_cycle_inputs(op, rhs, opts)?;
    let kernel = Kernel::tridiagonal(op, v1, u1, opts.tau_break, opts.reorthogonalize)?;
    OapState::new(kernel, rhs, c1, opts).run(opts.inner_cap(op.nrows()))
}

/// One OAP cycle on the bidiagonalization kernel.
pub fn oap_cycle_bidiag(
    op: &LinearOperator,
    rhs: &[f64],
    v1: &[f64],
    c1: f64,
    opts: &SolveOptions,
) -> Result<CycleOutcome> {
    check_cycle_inputs(op, rhs, opts)?;
    let kernel = Kernel::bidiagonal(op, v1, opts.tau_break, opts.reorthogonalize)?;
    OapState::new(kernel, rhs, c1, opts).run(opts.inner_cap(op.nrows()))
}

/// A cycle whose update is below this fraction of `‖x‖` made no progress.
///
/// With orthonormal directions `‖e_{i-1}‖² − ‖e_i‖² = ‖x_partial‖²`, so the
/// update norm measures the error decrease. The residual is no substitute:
/// it may rise for a few cycles while the error keeps falling.
const STALL_TOL: f64 = 1e-12;
/// Consecutive non-improving cycles before giving up.
const STAGNATION_CYCLES: usize = 3;

/// Restarted OAP: repeats cycles on the residual equation until the relative
/// residual reaches `opts.tol`.
pub fn roap_solve(
    op: &LinearOperator,
    b: &[f64],
    variant: Variant,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    check_cycle_inputs(op, b, opts)?;
    ensure_finite(b, "right-hand side")?;
    let n = op.ncols();
    let bnorm = kernels::norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
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

    let max_restarts = opts.restart_cap(n);
    let mut r = b.to_vec();
    let mut relres = 1.0;
    let mut history = vec![relres];
    let mut inner = Vec::new();
    let mut breakdowns = 0;
    let mut stalled = 0;

    let termination = loop {
        if relres <= opts.tol {
            break Termination::Converged;
        }
        if stalled >= STAGNATION_CYCLES {
            break Termination::Stagnation;
        }
        if inner.len() >= max_restarts {
            break Termination::MaxRestarts;
        }
        let rhs: &[f64] = match opts.rhs_mode {
            RhsMode::CycleResidual => &r,
            RhsMode::OriginalB => b,
        };
        let seed = match seed_from_vector(op, rhs, &r, opts.tau_break) {
            Ok(s) => s,
            // Aᵀr ≈ 0 with r ≠ 0: no usable direction left
            Err(Error::DegenerateSeed(_)) => break Termination::Stagnation,
            Err(e) => return Err(e),
        };
        let cycle = match variant {
            Variant::Bidiagonal => oap_cycle_bidiag(op, rhs, &seed.v1, seed.c1, opts)?,
            Variant::Tridiagonal => oap_cycle_tridiag(op, rhs, &seed.v1, &seed.v1, seed.c1, opts)?,
        };
        if cycle.stop == StopCause::Breakdown {
            breakdowns += 1;
        }
        inner.push(cycle.inner_steps);
        if cycle.kept == 0 {
            // a repeat from the same residual would return the same nothing
            history.push(relres);
            break Termination::Stagnation;
        }
        kernels::axpy(1.0, &cycle.x, &mut x);
        if kernels::norm2(&cycle.x) <= STALL_TOL * kernels::norm2(&x) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if !kernels::is_finite(&x) {
            return Err(Error::NumericalOverflow { step: inner.len() });
        }

        op.apply_into(&x, &mut r)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        relres = kernels::norm2(&r) / bnorm;
        history.push(relres);
    };

    Ok((
        x,
        SolveReport {
            termination,
            restarts: inner.len(),
            inner_iterations: inner,
            final_relres: relres,
            residual_history: history,
            breakdown_events: breakdowns,
        },
    ))
}

/// A single unrestarted OAP cycle seeded from `b`.
pub fn oap_solve(
    op: &LinearOperator,
    b: &[f64],
    variant: Variant,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let single = SolveOptions {
        max_restarts: Some(1),
        ..opts.clone()
    };
    roap_solve(op, b, variant, &single)
}
