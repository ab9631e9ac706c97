mod common;

use common::*;
use nalgebra::DVector;
use oap::problems::*;
use std::collections::VecDeque;

#[test]
fn lshape_is_positive_definite() {
    let p = gen_poisson_lshape(lshape_m_for(200)).unwrap();
    assert_eq!(p.n(), 208);
    let eig = to_na(&p.a).symmetric_eigen();
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert!(min > 0.0, "{min}");
}

#[test]
fn random_dense_is_nonsingular() {
    let p = gen_random_dense(300, 42).unwrap();
    let lu = to_na(&p.a).lu();
    assert!(lu.is_invertible());
    let x = lu.solve(&DVector::from_column_slice(&p.b)).unwrap();
    let x_true = p.x_true.as_ref().unwrap();
    assert!(norm(&sub(x.as_slice(), x_true)) <= 1e-6 * norm(x_true));
}

#[test]
fn tridiagonal_example_is_badly_conditioned() {
    let p = gen_tridiag_unsym(600).unwrap();
    let a = to_na(&p.a);
    let inv = a.clone().lu().try_inverse().unwrap();
    let one_norm = |m: &nalgebra::DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let cond = one_norm(&a) * one_norm(&inv);
    assert!(cond > 1e12, "{cond:e}");
}

#[test]
fn laplacian_is_weakly_dominant_and_irreducible() {
    let p = gen_convdiff2d(7, 6, 0.0, 0.0, 0.0).unwrap();
    let n = p.n();
    assert_eq!(p.a.asymmetry(), Some(0.0));
    let mut strict = false;
    for i in 0..n {
        let row = p.a.row_dense(i);
        let off: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.abs())
            .sum();
        assert!(row[i] >= off);
        strict |= row[i] > off;
    }
    assert!(strict);

    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for (j, v) in p.a.row_dense(i).into_iter().enumerate() {
            if v != 0.0 && !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    assert!(seen.iter().all(|&s| s));
}

#[test]
fn constructed_problems_are_consistent() {
    let cases = [
        ProblemSpec::ConvDiff2d {
            nx: 9,
            ny: 10,
            p1: 1.0,
            p2: 1.0,
            p3: 0.0,
            constructed: true,
        },
        ProblemSpec::PoissonLShape {
            m: 5,
            constructed: true,
        },
        ProblemSpec::TridiagUnsym { n: 600 },
        ProblemSpec::RandomDense { n: 300, seed: 42 },
    ];
    for spec in cases {
        let p = spec.generate().unwrap();
        let x = p.x_true.as_ref().expect("constructed");
        let ax = p.a.apply(x).unwrap();
        assert!(norm(&sub(&ax, &p.b)) <= 1e-12 * norm(&p.b), "{}", p.label);
    }
}

#[test]
fn generators_are_reproducible() {
    let specs = [
        ProblemSpec::ConvDiff2d {
            nx: 19,
            ny: 19,
            p1: 1.0,
            p2: 1.0,
            p3: 0.0,
            constructed: false,
        },
        ProblemSpec::PoissonLShape {
            m: 14,
            constructed: false,
        },
        ProblemSpec::TridiagUnsym { n: 50 },
        ProblemSpec::RandomDense { n: 40, seed: 9 },
    ];
    for spec in specs {
        let (a, b) = (spec.generate().unwrap(), spec.generate().unwrap());
        assert_eq!(a.a, b.a);
        assert_eq!(
            a.b.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
    let other = gen_random_dense(40, 10).unwrap();
    assert_ne!(other.a, gen_random_dense(40, 9).unwrap().a);
}

#[test]
fn pinned_sizes_match_their_meshes() {
    for (n, nx, ny) in CONVDIFF_MESHES {
        assert_eq!(gen_convdiff2d(nx, ny, 1.0, 1.0, 0.0).unwrap().n(), n);
    }
    assert_eq!(lshape_size(lshape_m_for(500)), 533);
}
