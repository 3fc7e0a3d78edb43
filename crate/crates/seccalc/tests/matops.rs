// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use proptest::prelude::*;
use seccalc::matops::{self, CMatrix, SectorialOp};
use seccalc::{Error, C64};
use std::f64::consts::{FRAC_PI_2, PI};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    a.sub(b).frobenius()
}

/// Upper triangular with positive real diagonal plus a random unitary
/// conjugation: always sectorial of angle zero.
fn random_sectorial(n: usize, seed: &[f64]) -> CMatrix {
    let mut t = CMatrix::zeros(n);
    let mut k = 0;
    let mut next = || {
        k += 1;
        seed[k % seed.len()] * (k as f64 * 0.7).sin()
    };
    for i in 0..n {
        t[(i, i)] = c(1.0 + i as f64 + next().abs(), 0.0);
        for j in i + 1..n {
            t[(i, j)] = c(next(), next());
        }
    }
    let h = DMatrix::from_fn(n, n, |i, j| c((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.11));
    let q = h.qr().q();
    let q = CMatrix::from_nalgebra(&q);
    q.mul(&t).mul(&q.adjoint())
}

#[test]
fn schur_factorization_reconstructs_input() {
    for tm in matops::test_matrices() {
        let op = SectorialOp::new(tm.a.clone()).unwrap();
        assert!(op.t.is_upper_triangular());
        let back = op.from_schur_basis(&op.t);
        let n = op.n() as f64;
        assert!(dist(&back, &tm.a) <= 1e-10 * tm.a.frobenius() * n, "{}", tm.name);
        let qq = op.q.adjoint().mul(&op.q);
        assert!(dist(&qq, &CMatrix::identity(op.n())) < 1e-12, "{}", tm.name);
    }
}

#[test]
fn spectral_norm_agrees_with_svd() {
    let mut mats: Vec<CMatrix> = matops::test_matrices().into_iter().map(|t| t.a).collect();
    mats.push(random_sectorial(6, &[0.3, -1.2, 2.5, 0.8]));
    for m in mats {
        let svd = m.to_nalgebra().singular_values();
        let want = svd.iter().cloned().fold(0.0, f64::max);
        assert!((m.norm2() - want).abs() <= 1e-10 * want, "{} vs {want}", m.norm2());
    }
}

#[test]
fn lu_solve_has_small_residual() {
    let a = random_sectorial(8, &[1.0, -0.4, 0.9]);
    let b = CMatrix::from_real_rows(&[
        &[1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 0.0, 3.0],
        &[0.0; 8],
        &[1.0; 8],
        &[0.5; 8],
        &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        &[2.0; 8],
        &[-1.0; 8],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ])
    .unwrap();
    let x = matops::lu_solve(&a, &b).unwrap();
    assert!(dist(&a.mul(&x), &b) < 1e-12 * a.frobenius() * x.frobenius());
}

#[test]
fn singular_shift_is_reported() {
    let a = CMatrix::from_real_diag(&[1.0, 2.0]);
    assert!(matches!(matops::resolvent(&a, c(-1.0, 0.0)), Err(Error::Singular(_))));
}

#[test]
fn resolvent_identity_holds() {
    for tm in matops::test_matrices() {
        let (z, w) = (c(0.7, 1.3), c(2.0, -0.4));
        let rz = matops::resolvent(&tm.a, z).unwrap();
        let rw = matops::resolvent(&tm.a, w).unwrap();
        // R(z) - R(w) = (w - z) R(z) R(w) for R(z) = (z + A)^{-1}
        let lhs = rz.sub(&rw);
        let rhs = rz.mul(&rw).scale(w - z);
        assert!(dist(&lhs, &rhs) < 1e-12 * (1.0 + rz.frobenius() * rw.frobenius()), "{}", tm.name);
    }
}

#[test]
fn exponential_semigroup_law() {
    for tm in matops::test_matrices() {
        let (s, t) = (0.3, 0.45);
        let prod = matops::expm(&tm.a, s).mul(&matops::expm(&tm.a, t));
        let direct = matops::expm(&tm.a, s + t);
        assert!(dist(&prod, &direct) < 1e-12 * (1.0 + direct.frobenius()), "{}", tm.name);
        assert!(dist(&matops::expm(&tm.a, 0.0), &CMatrix::identity(tm.a.n())) < 1e-15);
    }
}

#[test]
fn expm_matches_eigen_path() {
    for tm in matops::test_matrices() {
        let op = SectorialOp::new(tm.a.clone()).unwrap();
        if !op.is_diagonalizable() {
            continue;
        }
        let e = op.eig_function(&|l| (-l * 0.2).exp()).unwrap();
        let m = matops::expm(&tm.a, 0.2);
        assert!(dist(&e, &m) < 1e-10 * (1.0 + m.frobenius()), "{}", tm.name);
    }
}

#[test]
fn jordan_block_exponential_has_derivative_entry() {
    let m = matops::expm(&matops::jordan2(1.0), 1.0);
    let e = (-1.0f64).exp();
    assert!((m[(0, 0)] - c(e, 0.0)).norm() < 1e-14);
    assert!((m[(0, 1)] - c(-e, 0.0)).norm() < 1e-14);
}

#[test]
fn fractional_powers_compose() {
    for tm in matops::test_matrices() {
        let op = SectorialOp::new(tm.a.clone()).unwrap();
        if op.theta_est >= PI {
            continue;
        }
        let half = op.frac_power(0.5).unwrap();
        assert!(dist(&half.mul(&half), &tm.a) < 1e-9 * tm.a.frobenius(), "{}", tm.name);
        let third = op.frac_power(1.0 / 3.0).unwrap();
        let cube = third.mul(&third).mul(&third);
        assert!(dist(&cube, &tm.a) < 1e-9 * tm.a.frobenius(), "{}: {}", tm.name, dist(&cube, &tm.a));
        let p = op.power_op(0.5).unwrap().frac_power(2.0).unwrap();
        assert!(dist(&p, &tm.a) < 1e-9 * tm.a.frobenius(), "{}: {}", tm.name, dist(&p, &tm.a));
    }
}

#[test]
fn jordan_square_root_matches_closed_form() {
    // sqrt of [[λ,1],[0,λ]] is [[√λ, 1/(2√λ)],[0, √λ]]
    let op = SectorialOp::new(matops::jordan2(4.0)).unwrap();
    assert!(!op.is_diagonalizable());
    let r = op.frac_power(0.5).unwrap();
    assert!((r[(0, 0)] - c(2.0, 0.0)).norm() < 1e-9);
    assert!((r[(0, 1)] - c(0.25, 0.0)).norm() < 1e-9);
    assert!(r[(1, 0)].norm() < 1e-12);
}

#[test]
fn fractional_resolvent_paths_agree() {
    let op = SectorialOp::new(matops::rotation_scaled(2.0, PI / 6.0)).unwrap();
    for gamma in [0.5, 1.5, 2.25] {
        let z = c(0.8, 0.3);
        let a = op.resolvent_frac(z, gamma).unwrap();
        let b = op.resolvent_frac_stieltjes(z, gamma).unwrap();
        assert!(dist(&a, &b) < 1e-8 * a.frobenius(), "gamma {gamma}");
    }
}

#[test]
fn sector_constants() {
    // normal matrices: M_{π/2} = 1 when the spectrum is on the positive axis
    let op = SectorialOp::new(CMatrix::from_real_diag(&[1.0, 10.0])).unwrap();
    assert!((op.m_a().unwrap() - 1.0).abs() < 1e-9);
    // Jordan blocks are not normal: M_A exceeds 1
    let j = SectorialOp::new(matops::jordan2(1.0)).unwrap();
    assert!(j.m_a().unwrap() > 1.0);
    // decreasing ψ shrinks the sector Σ_{π-ψ} and lets it approach the spectrum
    let r = SectorialOp::new(matops::rotation_scaled(2.0, PI / 3.0)).unwrap();
    let mut last = 0.0;
    for psi in [FRAC_PI_2 + 0.6, FRAC_PI_2 + 0.3, FRAC_PI_2, PI / 3.0 + 0.2, PI / 3.0 + 0.05] {
        let m = r.sector_constant(psi).unwrap();
        assert!(m >= last * (1.0 - 1e-12), "psi {psi}: {m} < {last}");
        last = m;
    }
    assert!(matches!(r.sector_constant(PI / 4.0), Err(Error::Precondition(_))));
    assert!(r.cached_constants().len() >= 5);
}

#[test]
fn matrix_market_and_pair_parsers() {
    let text = "%%MatrixMarket matrix coordinate complex general\n% c\n2 2 3\n1 1 1.0 0.5\n2 2 2.0 0\n1 2 0 -1\n";
    let m = matops::matrix_from_market(text).unwrap();
    assert_eq!(m[(0, 0)], c(1.0, 0.5));
    assert_eq!(m[(0, 1)], c(0.0, -1.0));
    assert_eq!(m[(1, 1)], c(2.0, 0.0));
    let arr = matops::matrix_from_market("%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n").unwrap();
    // array storage is column-major
    assert_eq!(arr[(1, 0)], c(3.0, 0.0));
    assert_eq!(arr[(0, 1)], c(2.0, 0.0));
    assert!(matops::matrix_from_market("%%MatrixMarket matrix array real general\n2 3\n").is_err());
    assert!(matops::matrix_from_market("1 2 3").is_err());
    let p = matops::from_pairs(&[vec![[1.0, 0.0], [0.0, 2.0]], vec![[0.0, 0.0], [3.0, -1.0]]]).unwrap();
    assert_eq!(p[(0, 1)], c(0.0, 2.0));
    assert!(matops::from_pairs(&[vec![[1.0, 0.0], [0.0, 2.0]]]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    #[test]
    fn schur_residual_is_small(seed in prop::collection::vec(-3.0f64..3.0, 3..8), n in 2usize..9) {
        let a = random_sectorial(n, &seed);
        let op = SectorialOp::new(a.clone()).unwrap();
        let back = op.from_schur_basis(&op.t);
        prop_assert!(dist(&back, &a) <= 1e-10 * a.frobenius() * n as f64);
    }

    #[test]
    fn semigroup_law_random(seed in prop::collection::vec(-2.0f64..2.0, 3..6), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let a = random_sectorial(5, &seed);
        let prod = matops::expm(&a, s).mul(&matops::expm(&a, t));
        let direct = matops::expm(&a, s + t);
        prop_assert!(dist(&prod, &direct) < 1e-11 * (1.0 + direct.frobenius()));
    }
}
