mod common;

use common::*;
use nalgebra::DMatrix;
use oap::lanczos::{bidiagonalize, tridiagonalize, Reduction, DEFAULT_TAU_BREAK};
use oap::LinearOperator;
use proptest::prelude::*;

fn tri(op: &LinearOperator, v1: &[f64], u1: &[f64], steps: usize, reorth: bool) -> Reduction {
    tridiagonalize(op, v1, u1, steps, reorth, DEFAULT_TAU_BREAK).unwrap()
}

fn bi(op: &LinearOperator, v1: &[f64], steps: usize, reorth: bool) -> Reduction {
    bidiagonalize(op, v1, steps, reorth, DEFAULT_TAU_BREAK).unwrap()
}

/// `UᵀAV` through the dense oracle.
fn projected(op: &LinearOperator, r: &Reduction) -> DMatrix<f64> {
    columns(&r.u).transpose() * to_na(op) * columns(&r.v)
}

#[test]
fn reorthogonalized_bases_are_orthonormal_to_machine_level() {
    let mut g = rng(11);
    for _ in 0..5 {
        let op = from_na(&random_with_condition(20, 1e3, &mut g));
        let v1 = random_unit(20, &mut g);
        let u1 = random_unit(20, &mut g);
        let t = tri(&op, &v1, &u1, 19, true);
        assert_eq!(t.breakdown_step, None);
        assert_eq!((t.v.len(), t.u.len()), (20, 20));
        assert!(gram_error(&t.v) <= 1e-12, "{}", gram_error(&t.v));
        assert!(gram_error(&t.u) <= 1e-12, "{}", gram_error(&t.u));

        let b = bi(&op, &v1, 19, true);
        assert_eq!((b.v.len(), b.u.len()), (20, 19));
        assert!(gram_error(&b.v) <= 1e-12, "{}", gram_error(&b.v));
        assert!(gram_error(&b.u) <= 1e-12, "{}", gram_error(&b.u));
    }
}

#[test]
fn projected_matrix_is_tridiagonal() {
    let mut g = rng(12);
    let op = from_na(&random_with_condition(20, 1e3, &mut g));
    let v1 = random_unit(20, &mut g);
    let u1 = random_unit(20, &mut g);
    let r = tri(&op, &v1, &u1, 19, true);
    let t = projected(&op, &r);
    for i in 0..20usize {
        for j in 0..20usize {
            if i.abs_diff(j) > 1 {
                assert!(t[(i, j)].abs() <= 1e-10, "T[{i},{j}] = {}", t[(i, j)]);
            }
        }
    }
    // T[k,k] = α_k, T[k+1,k] = γ_k, T[k,k+1] = β_k
    for k in 0..19 {
        assert!((t[(k, k)] - r.coeffs.alphas[k]).abs() <= 1e-10);
        assert!((t[(k + 1, k)] - r.coeffs.gammas[k]).abs() <= 1e-10);
        assert!((t[(k, k + 1)] - r.coeffs.betas[k]).abs() <= 1e-10);
    }
}

#[test]
fn projected_matrix_is_upper_bidiagonal() {
    let mut g = rng(13);
    let op = from_na(&random_with_condition(20, 1e3, &mut g));
    let v1 = random_unit(20, &mut g);
    let r = bi(&op, &v1, 19, true);
    let t = projected(&op, &r);
    assert_eq!(t.shape(), (19, 20));
    for i in 0..19 {
        for j in 0..20 {
            let expected = if j == i {
                r.coeffs.alphas[i]
            } else if j == i + 1 {
                r.coeffs.betas[i]
            } else {
                0.0
            };
            assert!((t[(i, j)] - expected).abs() <= 1e-10, "T[{i},{j}]");
        }
    }
}

#[test]
fn six_bidiagonal_steps_on_a_random_matrix() {
    let mut g = rng(14);
    let m = DMatrix::from_fn(12, 12, |_, _| rand::Rng::random_range(&mut g, -1.0..1.0));
    let op = from_na(&m);
    let v1 = random_unit(12, &mut g);
    let r = bi(&op, &v1, 6, false);
    let u = columns(&r.u);
    let v = columns(&r.v[..6]);
    let t = u.transpose() * m * v;
    for i in 0..6 {
        for j in 0..6 {
            let expected = match j as isize - i as isize {
                0 => r.coeffs.alphas[i],
                1 => r.coeffs.betas[i],
                _ => 0.0,
            };
            assert!((t[(i, j)] - expected).abs() <= 1e-10);
        }
    }
}

#[test]
fn short_runs_stay_orthogonal_without_reorthogonalization() {
    let mut g = rng(15);
    for _ in 0..5 {
        let op = from_na(&random_with_condition(50, 1e2, &mut g));
        let v1 = random_unit(50, &mut g);
        let u1 = random_unit(50, &mut g);
        let t = tri(&op, &v1, &u1, 5, false);
        assert!(gram_error(&t.v) <= 1e-8 && gram_error(&t.u) <= 1e-8);
        let b = bi(&op, &v1, 5, false);
        assert!(gram_error(&b.v) <= 1e-8 && gram_error(&b.u) <= 1e-8);
    }
}

#[test]
fn recurrences_hold_step_by_step() {
    let mut g = rng(16);
    let m = random_with_condition(30, 1e2, &mut g);
    let op = from_na(&m);
    let scale = op.frobenius_norm();
    let v1 = random_unit(30, &mut g);
    let u1 = random_unit(30, &mut g);

    let t = tri(&op, &v1, &u1, 20, false);
    let c = &t.coeffs;
    for k in 0..20 {
        let mut r = op.apply(&t.v[k]).unwrap();
        for i in 0..30 {
            r[i] -= c.gammas[k] * t.u[k + 1][i] + c.alphas[k] * t.u[k][i];
            if k > 0 {
                r[i] -= c.betas[k - 1] * t.u[k - 1][i];
            }
        }
        assert!(norm(&r) <= 1e-12 * scale, "step {}: {}", k + 1, norm(&r));
    }

    let b = bi(&op, &v1, 20, false);
    let c = &b.coeffs;
    for k in 0..20 {
        let mut r = op.apply(&b.v[k]).unwrap();
        for i in 0..30 {
            r[i] -= c.alphas[k] * b.u[k][i];
            if k > 0 {
                r[i] -= c.betas[k - 1] * b.u[k - 1][i];
            }
        }
        assert!(norm(&r) <= 1e-12 * scale, "step {}: {}", k + 1, norm(&r));
    }
}

#[test]
fn symmetric_matrix_collapses_to_one_sequence() {
    let mut g = rng(17);
    let m = DMatrix::from_fn(10, 10, |_, _| rand::Rng::random_range(&mut g, -1.0..1.0));
    let op = from_na(&(m.transpose() + &m));
    let v1 = random_unit(10, &mut g);
    let t = tri(&op, &v1, &v1, 9, false);
    for (u, v) in t.u.iter().zip(&t.v) {
        assert!(norm(&sub(u, v)) <= 1e-10);
    }
    for (gamma, beta) in t.coeffs.gammas.iter().zip(&t.coeffs.betas) {
        assert!((gamma - beta).abs() <= 1e-10 * beta.abs().max(1.0));
    }
}

#[test]
fn orthogonal_matrix_keeps_unit_alphas() {
    let mut g = rng(18);
    let q = random_orthogonal(16, &mut g);
    let op = from_na(&q);
    let v1 = random_unit(16, &mut g);
    let r = bi(&op, &v1, 15, true);
    for (k, a) in r.coeffs.alphas.iter().enumerate() {
        assert!((a - 1.0).abs() <= 1e-12, "alpha_{} = {a}", k + 1);
    }
}

#[test]
fn identity_breaks_down_immediately() {
    let op: LinearOperator = oap::CsrMatrix::identity(5).into();
    let mut g = rng(19);
    let v1 = random_unit(5, &mut g);
    assert_eq!(tri(&op, &v1, &v1, 4, false).breakdown_step, Some(1));
    assert_eq!(bi(&op, &v1, 4, false).breakdown_step, Some(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recurrence_norms_are_nonnegative(seed in any::<u64>(), n in 3usize..16) {
        let mut g = rng(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rand::Rng::random_range(&mut g, -1.0..1.0));
        let op = from_na(&m);
        let v1 = random_unit(n, &mut g);
        let u1 = random_unit(n, &mut g);
        let t = tri(&op, &v1, &u1, n - 1, false);
        prop_assert!(t.coeffs.betas.iter().all(|&b| b >= 0.0));
        prop_assert!(t.coeffs.gammas.iter().all(|&c| c >= 0.0));
        let b = bi(&op, &v1, n - 1, false);
        prop_assert!(b.coeffs.alphas.iter().all(|&a| a >= 0.0));
        prop_assert!(b.coeffs.betas.iter().all(|&x| x >= 0.0));
        prop_assert!(b.coeffs.gammas.is_empty());
    }

    #[test]
    fn reorthogonalized_gram_stays_within_bound(seed in any::<u64>(), n in 4usize..=30) {
        let mut g = rng(seed);
        let op = from_na(&random_with_condition(n, 1e3, &mut g));
        let v1 = random_unit(n, &mut g);
        let u1 = random_unit(n, &mut g);
        let t = tri(&op, &v1, &u1, n - 1, true);
        prop_assert!(gram_error(&t.v) <= 1e-10 && gram_error(&t.u) <= 1e-10);
        let b = bi(&op, &v1, n - 1, true);
        prop_assert!(gram_error(&b.v) <= 1e-10 && gram_error(&b.u) <= 1e-10);
    }
}
