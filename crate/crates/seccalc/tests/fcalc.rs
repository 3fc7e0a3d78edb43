// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

use seccalc::fcalc;
use seccalc::funcat::{self, SectorFn};
use seccalc::matops::{self, CMatrix, SectorialOp};
use seccalc::normcalc::QuadConfig;
use seccalc::{Error, C64};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

fn cfg() -> QuadConfig {
    let mut c = QuadConfig::with_tol(1e-9, 1e-9);
    c.parallel = false;
    c
}

fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    a.sub(b).norm2()
}

fn op(a: CMatrix) -> SectorialOp {
    SectorialOp::new(a).unwrap()
}

fn f(key: &str) -> SectorFn {
    funcat::from_key(key).unwrap()
}

#[test]
fn d_calc_matches_oracle_on_jordan_block() {
    let a = op(matops::jordan2(1.0));
    for key in ["resolvent:1", "arccot", "cayley:n=2"] {
        let g = f(key);
        let r = fcalc::d_calc(&g, &a, 1.0, &cfg()).unwrap();
        let want = CMatrix::from_rows(&[vec![g.eval(C64::new(1.0, 0.0)), g.deriv(C64::new(1.0, 0.0))], vec![
            C64::new(0.0, 0.0),
            g.eval(C64::new(1.0, 0.0)),
        ]])
        .unwrap();
        assert!(dist(&r.result, &want) < 1e-7, "{key}: {}", dist(&r.result, &want));
        assert!(r.oracle_diff.unwrap() < 1e-7);
        assert!(r.bound.unwrap().holds());
    }
}

#[test]
fn h_calc_methods_agree_with_oracle_on_both_sides_of_right_angle() {
    let a = op(matops::rotation_scaled(2.0, PI / 6.0));
    let g = f("exp_power:gamma=0.5,re=1,im=0");
    let want = matops::eig_calc_oracle(&a, &g).unwrap();
    for psi in [1.2, 2.0] {
        let l = fcalc::h_calc_lift(&g, &a, psi, &cfg()).unwrap();
        let c = fcalc::h_calc_arccot(&g, &a, psi, &cfg()).unwrap();
        assert!(dist(&l.result, &want) < 1e-7, "lift psi {psi}");
        assert!(dist(&c.result, &want) < 1e-7, "arccot psi {psi}");
    }
}

#[test]
fn calculus_is_multiplicative() {
    let a = op(matops::rotation_scaled(2.0, PI / 6.0));
    let pairs = [("resolvent:1", "arccot"), ("cayley:n=1", "exp_poly:nu=1,t=1"), ("resolvent:re=1,im=1", "resolvent:re=2,im=0")];
    for (k1, k2) in pairs {
        let (g, h) = (f(k1), f(k2));
        let gh = funcat::product(&g, &h);
        let c = cfg();
        let a1 = fcalc::d_calc(&g, &a, 2.0, &c).unwrap().result;
        let a2 = fcalc::d_calc(&h, &a, 2.0, &c).unwrap().result;
        let a12 = fcalc::d_calc(&gh, &a, 2.0, &c).unwrap().result;
        assert!(dist(&a1.mul(&a2), &a12) < 1e-7, "{k1} * {k2}");
    }
}

#[test]
fn d_calc_does_not_depend_on_s() {
    let a = op(CMatrix::from_real_diag(&[1.0, 4.0]));
    let g = f("zres:p=2,re=1,im=0");
    let results: Vec<CMatrix> = [0.0, 1.0, 2.0].iter().map(|s| fcalc::d_calc(&g, &a, *s, &cfg()).unwrap().result).collect();
    assert!(dist(&results[0], &results[1]) < 1e-7);
    assert!(dist(&results[0], &results[2]) < 1e-7);
}

#[test]
fn spectral_mapping_on_diagonalizable_matrix() {
    let a = op(matops::upwind(8).add(&CMatrix::from_real_diag(&[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5])));
    assert!(a.is_diagonalizable());
    let g = f("resolvent:1");
    let r = fcalc::d_calc(&g, &a, 1.0, &cfg()).unwrap();
    let mapped: Vec<C64> = a.eigvals.iter().map(|l| g.eval(*l)).collect();
    let got = op(r.result).eigvals;
    assert!(fcalc::spectrum_distance(&got, &mapped) < 1e-6);
}

#[test]
fn shifted_calculus_converges_to_unshifted() {
    let a = op(matops::rotation_scaled(1.0, FRAC_PI_3));
    let g = f("arccot");
    let base = fcalc::d_calc(&g, &a, 1.0, &cfg()).unwrap().result;
    let mut last = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let d = dist(&fcalc::shifted_calc(&g, &a, 1.0, eps, &cfg()).unwrap().result, &base);
        assert!(d < last);
        last = d;
    }
    assert!(last < 1e-2);
}

#[test]
fn hille_phillips_agrees_with_exponential() {
    let a = op(matops::upwind(8));
    let g = f("resolvent:1");
    let r = fcalc::hp_calc(&g, &a, &cfg()).unwrap();
    let want = matops::resolvent(&a.a, C64::new(1.0, 0.0)).unwrap();
    assert!(dist(&r.result, &want) < 1e-8 * want.norm2().max(1.0));
    assert!(matches!(fcalc::hp_calc(&f("arccot"), &a, &cfg()), Err(Error::Unsupported(_))));
}

#[test]
fn arccot_operator_matches_scalar_function() {
    let a = op(CMatrix::from_real_diag(&[0.5, 3.0]));
    for psi in [1.0, 2.0] {
        let r = fcalc::arccot_int(&a, psi, 1.0, &cfg()).unwrap();
        let gamma = PI / (2.0 * psi);
        for (i, l) in [0.5f64, 3.0].iter().enumerate() {
            let want = seccalc::reprkernel::arccot(C64::new(l.powf(gamma), 0.0));
            assert!((r.result[(i, i)] - want).norm() < 1e-8, "psi {psi}");
        }
    }
}

#[test]
fn preconditions_and_divergence_are_errors() {
    let wide = op(matops::rotation_scaled(2.0, 2.0 * PI / 3.0));
    assert!(matches!(fcalc::d_calc(&f("arccot"), &wide, 0.0, &cfg()), Err(Error::Precondition(_))));
    let a = op(CMatrix::from_real_diag(&[1.0, 2.0]));
    assert!(matches!(fcalc::d_calc(&f("exp"), &a, 0.0, &cfg()), Err(Error::Divergent(_))));
    // ψ must exceed the spectral angle
    let r = op(matops::rotation_scaled(2.0, FRAC_PI_3));
    assert!(matches!(fcalc::h_calc_lift(&f("arccot"), &r, 0.9, &cfg()), Err(Error::Precondition(_))));
    // arccot is holomorphic on the right half-plane only
    assert!(matches!(fcalc::h_calc_arccot(&f("arccot"), &a, FRAC_PI_2 + 0.3, &cfg()), Err(Error::Domain(_))));
}
