//! Test problem generators.
//!
//! Every generator is a pure function of its parameters.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, LinearOperator};

/// Sampled solution shapes for constructed right-hand sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionProfile {
    /// `x(t) = t(1−t)eᵗ` at `t_i = i/(n+1)`.
    Exp1,
    /// `x(t) = t(1−t)e³ᵗ` at `t_i = i/n`.
    Exp3,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    ConvDiff2d {
        nx: usize,
        ny: usize,
        p1: f64,
        p2: f64,
        p3: f64,
        /// Use `x_true = 1` and `b = A·x_true` instead of `f ≡ 1`.
        constructed: bool,
    },
    PoissonLShape {
        m: usize,
        constructed: bool,
    },
    TridiagUnsym {
        n: usize,
    },
    RandomDense {
        n: usize,
        seed: u64,
    },
}

impl ProblemSpec {
    pub fn generate(&self) -> Result<GeneratedProblem> {
        match *self {
            ProblemSpec::ConvDiff2d {
                nx,
                ny,
                p1,
                p2,
                p3,
                constructed,
            } => {
                let p = gen_convdiff2d(nx, ny, p1, p2, p3)?;
                Ok(if constructed {
                    p.with_ones_solution()
                } else {
                    p
                })
            }
            ProblemSpec::PoissonLShape { m, constructed } => {
                let p = gen_poisson_lshape(m)?;
                Ok(if constructed {
                    p.with_ones_solution()
                } else {
                    p
                })
            }
            ProblemSpec::TridiagUnsym { n } => gen_tridiag_unsym(n),
            ProblemSpec::RandomDense { n, seed } => gen_random_dense(n, seed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub a: LinearOperator,
    pub b: Vec<f64>,
    pub x_true: Option<Vec<f64>>,
    pub label: String,
}

impl GeneratedProblem {
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Replaces `b` by `A·1` and records `x_true = 1`.
    pub fn with_ones_solution(mut self) -> Self {
        let x = vec![1.0; self.a.ncols()];
        self.b = self.a.apply(&x).expect("square operator");
        self.x_true = Some(x);
        self
    }
}

/// Meshes used for the convection-diffusion sizes of the benchmark tables.
pub const CONVDIFF_MESHES: [(usize, usize, usize); 8] = [
    (90, 9, 10),
    (171, 9, 19),
    (361, 19, 19),
    (551, 19, 29),
    (741, 19, 39),
    (1131, 29, 39),
    (1521, 39, 39),
    (2401, 49, 49),
];

/// `(nx, ny)` pinned for a table size `n`.
pub fn convdiff_mesh(n: usize) -> Option<(usize, usize)> {
    CONVDIFF_MESHES
        .iter()
        .find(|(size, _, _)| *size == n)
        .map(|&(_, nx, ny)| (nx, ny))
}

/// Five-point convection-diffusion stencil on the unit square,
/// `−Δu + p1·u_x + p2·u_y + p3·u = f`, with `f ≡ 1`.
pub fn gen_convdiff2d(nx: usize, ny: usize, p1: f64, p2: f64, p3: f64) -> Result<GeneratedProblem> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 2x2, got {nx}x{ny}"
        )));
    }
    let hx = 1.0 / (nx + 1) as f64;
    let hy = 1.0 / (ny + 1) as f64;
    let diag = 2.0 / (hx * hx) + 2.0 / (hy * hy) + p3;
    let east = -1.0 / (hx * hx) + p1 / (2.0 * hx);
    let west = -1.0 / (hx * hx) - p1 / (2.0 * hx);
    let north = -1.0 / (hy * hy) + p2 / (2.0 * hy);
    let south = -1.0 / (hy * hy) - p2 / (2.0 * hy);

    let n = nx * ny;
    let mut t = Vec::with_capacity(5 * n);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if j > 0 {
                t.push((k, k - nx, south));
            }
            if i > 0 {
                t.push((k, k - 1, west));
            }
            t.push((k, k, diag));
            if i + 1 < nx {
                t.push((k, k + 1, east));
            }
            if j + 1 < ny {
                t.push((k, k + nx, north));
            }
        }
    }
    Ok(GeneratedProblem {
        a: CsrMatrix::from_triplets(n, n, t)?.into(),
        b: vec![1.0; n],
        x_true: None,
        label: "convdiff2d".into(),
    })
}

/// Number of unknowns of the L-shaped grid with parameter `m`.
pub fn lshape_size(m: usize) -> usize {
    (m - 1) * (3 * m - 1)
}

/// Grid parameter `m ≥ 3` whose unknown count is nearest `target`.
pub fn lshape_m_for(target: usize) -> usize {
    let mut best = 3;
    let mut m = 3;
    loop {
        let n = lshape_size(m);
        if n.abs_diff(target) < lshape_size(best).abs_diff(target) {
            best = m;
        }
        if n > target {
            return best;
        }
        m += 1;
    }
}

/// Five-point Laplacian on `[0,1]×[0,½] ∪ [0,½]×[½,1]` with `h = 1/(2m)`.
pub fn gen_poisson_lshape(m: usize) -> Result<GeneratedProblem> {
    if m < 3 {
        return Err(Error::InvalidInput(format!(
            "m must be at least 3, got {m}"
        )));
    }
    let side = 2 * m;
    let h = 1.0 / side as f64;
    let inside = |i: usize, j: usize| {
        (1..side).contains(&i) && (1..side).contains(&j) && !(i >= m && j >= m)
    };
    let mut index = vec![usize::MAX; (side + 1) * (side + 1)];
    let mut n = 0;
    for j in 1..side {
        for i in 1..side {
            if inside(i, j) {
                index[j * (side + 1) + i] = n;
                n += 1;
            }
        }
    }
    let diag = 4.0 / (h * h);
    let off = -1.0 / (h * h);
    let mut t = Vec::with_capacity(5 * n);
    for j in 1..side {
        for i in 1..side {
            if !inside(i, j) {
                continue;
            }
            let k = index[j * (side + 1) + i];
            t.push((k, k, diag));
            for (ni, nj) in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                if inside(ni, nj) {
                    t.push((k, index[nj * (side + 1) + ni], off));
                }
            }
        }
    }
    debug_assert_eq!(n, lshape_size(m));
    Ok(GeneratedProblem {
        a: CsrMatrix::from_triplets(n, n, t)?.into(),
        b: vec![1.0; n],
        x_true: None,
        label: "poisson-lshape".into(),
    })
}

/// `tridiag(−1, 2, −1.1)` with the `Exp1` solution.
pub fn gen_tridiag_unsym(n: usize) -> Result<GeneratedProblem> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "n must be at least 2, got {n}"
        )));
    }
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -1.0));
        }
        t.push((i, i, 2.0));
        if i + 1 < n {
            t.push((i, i + 1, -1.1));
        }
    }
    let a: LinearOperator = CsrMatrix::from_triplets(n, n, t)?.into();
    constructed(
        a,
        sample_solution(SolutionProfile::Exp1, n),
        "tridiag-unsym",
    )
}

/// Dense matrix with entries uniform on `(0,1)` from `Pcg64(seed)`, row by
/// row, with the `Exp3` solution.
pub fn gen_random_dense(n: usize, seed: u64) -> Result<GeneratedProblem> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * n).map(|_| rng.sample(Open01)).collect();
    let a: LinearOperator = DenseMatrix::new(n, n, data)?.into();
    constructed(a, sample_solution(SolutionProfile::Exp3, n), "random-dense")
}

fn constructed(a: LinearOperator, x: Vec<f64>, label: &str) -> Result<GeneratedProblem> {
    let b = a.apply(&x)?;
    Ok(GeneratedProblem {
        a,
        b,
        x_true: Some(x),
        label: label.into(),
    })
}

pub fn sample_solution(profile: SolutionProfile, n: usize) -> Vec<f64> {
    let (h, rate) = match profile {
        SolutionProfile::Exp1 => (1.0 / (n + 1) as f64, 1.0),
        SolutionProfile::Exp3 => (1.0 / n as f64, 3.0),
    };
    (1..=n)
        .map(|i| {
            let t = i as f64 * h;
            t * (1.0 - t) * (rate * t).exp()
        })
        .collect()
}
