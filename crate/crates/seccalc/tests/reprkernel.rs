// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use seccalc::funcat;
use seccalc::normcalc::QuadConfig;
use seccalc::reprkernel as rk;
use seccalc::{Error, C64};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

fn cfg() -> QuadConfig {
    let mut c = QuadConfig::with_tol(1e-9, 1e-9);
    c.parallel = false;
    c
}

#[test]
fn kernel_integral_equals_half_angle() {
    for psi in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, 0.1, 3.0] {
        let r = rk::arccot_kernel_identity(psi, &cfg()).unwrap();
        assert!((r.value.re - psi / 2.0).abs() < 1e-9, "psi {psi}: {}", r.value.re);
    }
    assert!(rk::arccot_kernel_identity(PI, &cfg()).is_err());
}

#[test]
fn log_kernel_helpers_avoid_cancellation() {
    // t = 1 + 1e-12, ν = 2: t^ν - 1 = 2e-12 + 1e-24
    let y = rk::pow_minus_one(1e-12, 2.0);
    assert!((y - (2e-12 + 1e-24)).abs() < 1e-14 * y);
    let direct = ((1.0 + 4.0f64) / (1.0 - 4.0f64)).abs().ln();
    assert!((rk::log_kernel(3.0) - direct).abs() < 1e-15);
    let x = 0.5f64;
    assert!((rk::log_kernel(x - 1.0) - ((1.0 + x) / (1.0 - x)).ln()).abs() < 1e-15);
    // far from t = 1 the offset t - 1 rounds to -1; the kernel must not vanish
    let t = 1e-20;
    let k = rk::kernel_at(t, t - 1.0, 0.5);
    assert!((k - 2e-10).abs() < 1e-24, "{k}");
}

#[test]
fn complex_arccot_matches_real_values() {
    assert!((rk::arccot(C64::new(1.0, 0.0)) - C64::new(FRAC_PI_4, 0.0)).norm() < 1e-15);
    let big = C64::new(3e8, 1e8);
    assert!((rk::arccot(big) - big.inv()).norm() < 1e-24);
    // cot(arccot w) = w
    let w = C64::new(0.3, 2.0);
    let a = rk::arccot(w);
    assert!((a.cos() / a.sin() - w).norm() < 1e-13);
}

#[test]
fn three_reproducing_formulas_agree_at_common_points() {
    let c = cfg();
    let f = funcat::from_key("resolvent:re=1,im=0.5").unwrap();
    for z in [C64::new(0.5, 0.1), C64::new(2.0, -1.0), C64::new(0.0, 0.0)] {
        let a = rk::reproduce_ds(&f, 0.5, z, &c).unwrap();
        let b = rk::reproduce_hpsi(&f, 1.2, z, &c).unwrap();
        let d = rk::reproduce_arccot(&f, 1.2, z, &c).unwrap();
        for r in [&a, &b, &d] {
            assert!(r.abs_err < 1e-7, "{:?} at {z}: {}", r.formula, r.abs_err);
        }
    }
}

#[test]
fn arccot_formula_beyond_right_angle() {
    let c = cfg();
    let f = funcat::from_key("exp_power:gamma=0.5,re=1,im=0").unwrap();
    for z in [C64::new(-1.0, 1.0), C64::new(3.0, 0.0), C64::from_polar(0.5, 2.0)] {
        let r = rk::reproduce_arccot(&f, 2.5, z, &c).unwrap();
        assert!(r.abs_err < 1e-7, "{z}: {}", r.abs_err);
    }
}

#[test]
fn points_outside_the_sector_are_rejected() {
    let f = funcat::from_key("arccot").unwrap();
    let err = rk::reproduce_arccot(&f, FRAC_PI_4, C64::new(1.0, 2.0), &cfg()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    assert!(matches!(rk::q_apply(&f, 0.0, C64::new(-1.0, 0.0), &cfg()), Err(Error::Domain(_))));
    assert!(matches!(rk::q_apply(&f, -1.0, C64::new(1.0, 0.0), &cfg()), Err(Error::Domain(_))));
}

#[test]
fn decay_probe_separates_decaying_and_flat_functions() {
    let r = funcat::from_key("resolvent:re=1,im=0").unwrap();
    assert!(rk::decay_probe(&r.derivative(), 1, FRAC_PI_2).unwrap().decays);
    // z r_1(z) tends to 1, so |z r_1| does not decay
    assert!(!rk::decay_probe(&r, 1, FRAC_PI_2).unwrap().decays);
    assert!(rk::decay_probe(&r, 2, FRAC_PI_2).is_err());
}

#[test]
fn q_operator_respects_its_sector_bound() {
    let c = cfg();
    let g = funcat::from_key("resolvent:re=1,im=0").unwrap().derivative();
    let vs = seccalc::normcalc::vs_norm(&g, 1.0, &c).unwrap().value;
    for psi in [0.3, 1.0, 1.4] {
        let bound = rk::q_sector_bound(vs, 1.0, psi);
        for r in [0.1, 1.0, 10.0] {
            for sign in [1.0, -1.0] {
                let z = C64::from_polar(r, sign * psi);
                let q = rk::q_apply(&g, 1.0, z, &c).unwrap().value.norm();
                assert!(q <= bound, "psi {psi} z {z}: {q} > {bound}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, .. ProptestConfig::default() })]

    #[test]
    fn qs_reproduces_resolvents(re in 0.2f64..5.0, im in -3.0f64..3.0, r in 0.1f64..10.0, a in -1.2f64..1.2, s in 0.0f64..2.0) {
        let f = funcat::resolvent(C64::new(re, im)).unwrap();
        let rep = rk::reproduce_ds(&f, s, C64::from_polar(r, a), &cfg()).unwrap();
        prop_assert!(rep.abs_err < 1e-7, "{}", rep.abs_err);
    }
}
