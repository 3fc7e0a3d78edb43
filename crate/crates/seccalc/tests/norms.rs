// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use seccalc::funcat::{self, SectorFn};
use seccalc::normcalc::{self, QuadConfig};
use seccalc::special::CATALAN;
use seccalc::C64;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

fn cfg(tol: f64) -> QuadConfig {
    let mut c = QuadConfig::with_tol(tol, tol);
    c.parallel = false;
    c
}

/// `∫_{ℂ₊} α^s |g(z)| |z|^{-s-1} dS` on a fixed Cartesian-type grid:
/// `α = e^x`, `β = α sinh y`, trapezoid rule in `(x, y)`.
fn brute_vs(g: &dyn Fn(C64) -> C64, s: f64, h: f64) -> f64 {
    let (xmax, ymax) = (36.0, 36.0);
    let nx = (2.0 * xmax / h) as i64;
    let ny = (2.0 * ymax / h) as i64;
    let mut total = 0.0;
    for i in 0..=nx {
        let x = -xmax + i as f64 * h;
        let alpha = x.exp();
        let mut row = 0.0;
        for j in 0..=ny {
            let y = -ymax + j as f64 * h;
            let z = C64::new(alpha, alpha * y.sinh());
            // dS = α² cosh y dx dy, |z| = α cosh y
            row += alpha * g(z).norm() / y.cosh().powf(s);
        }
        total += row;
    }
    total * h * h
}

fn brute_ds(f: &SectorFn, s: f64) -> f64 {
    brute_ds_h(f, s, 0.02)
}

fn brute_ds_h(f: &SectorFn, s: f64, h: f64) -> f64 {
    f.limit_at_inf.map(|l| l.norm()).unwrap_or(0.0) + brute_vs(&|z| f.deriv(z), s, h)
}

#[test]
fn brute_force_oracle_reproduces_closed_forms() {
    let r1 = funcat::resolvent(C64::new(1.0, 0.0)).unwrap();
    let d0 = brute_ds(&r1, 0.0);
    let d1 = brute_ds(&r1, 1.0);
    assert!((d0 - 4.0 * CATALAN).abs() < 1e-7, "{d0}");
    assert!((d1 - PI * LN_2).abs() < 1e-7, "{d1}");
}

#[test]
fn adaptive_engine_matches_closed_forms() {
    let r1 = funcat::resolvent(C64::new(1.0, 0.0)).unwrap();
    let d0 = normcalc::ds_norm(&r1, 0.0, &cfg(1e-10)).unwrap();
    let d1 = normcalc::ds_norm(&r1, 1.0, &cfg(1e-10)).unwrap();
    assert!((d0.value - 4.0 * CATALAN).abs() < 1e-8, "{}", d0.value);
    assert!((d1.value - PI * LN_2).abs() < 1e-8, "{}", d1.value);
}

#[test]
fn adaptive_engine_matches_brute_force() {
    for (key, s) in [("arccot", 2.0), ("exp", 1.0), ("cayley:n=3", 0.0), ("resolvent:re=1,im=2,gamma=1", 0.5), ("exp_poly:nu=1,t=1", 1.5)] {
        let f = funcat::from_key(key).unwrap();
        let a = normcalc::ds_norm(&f, s, &cfg(1e-9)).unwrap();
        let b = brute_ds(&f, s);
        assert!(!a.divergent, "{key}");
        assert!((a.value - b).abs() < 1e-6 * b.max(1.0), "{key} s={s}: adaptive {} brute {b}", a.value);
    }
}

/// With `s = 0` the poles of `arccot'` at `±i` sit on the boundary and the
/// trapezoid rule converges at first order; refining must close in on the
/// adaptive value from below.
#[test]
fn brute_force_refinement_approaches_arccot_s0() {
    let f = funcat::from_key("arccot").unwrap();
    let a = normcalc::ds_norm(&f, 0.0, &cfg(1e-9)).unwrap().value;
    let coarse = brute_ds_h(&f, 0.0, 0.04);
    let mid = brute_ds_h(&f, 0.0, 0.02);
    let fine = brute_ds_h(&f, 0.0, 0.01);
    assert!(coarse < mid && mid < fine && fine < a, "{coarse} {mid} {fine} {a}");
    // first-order extrapolation from the two finest grids
    let extrap = 2.0 * fine - mid;
    assert!((extrap - a).abs() < 2e-3, "{extrap} vs {a}");
}

#[test]
fn cayley_norm_closed_form_for_n_1() {
    // f_1 = 1 - 2 r_1, so the norm is 1 + 8 Catalan
    let f = funcat::make_cayley_power(1).unwrap();
    let d = normcalc::ds_norm(&f, 0.0, &cfg(1e-10)).unwrap();
    assert!((d.value - (1.0 + 8.0 * CATALAN)).abs() < 1e-8);
}

#[test]
fn divergence_is_flagged_exactly_when_s_does_not_exceed_nu() {
    let c = cfg(1e-8);
    let e = funcat::from_key("exp").unwrap();
    assert!(normcalc::ds_norm(&e, 0.0, &c).unwrap().divergent);
    assert!(!normcalc::ds_norm(&e, 0.5, &c).unwrap().divergent);
    let ze = funcat::from_key("exp_poly:nu=1,t=1").unwrap();
    assert!(normcalc::ds_norm(&ze, 1.0, &c).unwrap().divergent);
    assert!(!normcalc::ds_norm(&ze, 1.5, &c).unwrap().divergent);
}

#[test]
fn hardy_family_two_sided_and_one_sided_norms() {
    let c = cfg(1e-10);
    for k in [0.0, 1.0, 4.0, 16.0] {
        let f = funcat::make_hardy_family(k);
        let full = normcalc::h1_sector_norm(&f, FRAC_PI_2, &c).unwrap().value;
        let line = normcalc::h1_halfplane_norm(&f, &c).unwrap().value;
        let star = normcalc::h1_star_norm(&f, FRAC_PI_2, &c).unwrap().value;
        assert!((full - 1.0).abs() < 1e-7, "k={k}: {full}");
        assert!((line - full).abs() < 1e-7, "k={k}: {line} vs {full}");
        assert!((star - (0.5 + k.atan() / PI)).abs() < 1e-7, "k={k}: {star}");
    }
}

#[test]
fn hp_norm_of_laplace_entries() {
    let c = cfg(1e-10);
    // r_1 = ℒ(e^{-t}): total variation 1
    let r1 = funcat::resolvent(C64::new(1.0, 0.0)).unwrap();
    assert!((normcalc::hp_norm(&r1, &c).unwrap().value - 1.0).abs() < 1e-9);
    // f_1 = δ_0 - 2 e^{-t}
    let f1 = funcat::make_cayley_power(1).unwrap();
    assert!((normcalc::hp_norm(&f1, &c).unwrap().value - 3.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, .. ProptestConfig::default() })]

    /// The 𝒟ₛ norm is invariant under dilations `z ↦ tz`.
    #[test]
    fn ds_norm_is_dilation_invariant(t in 0.05f64..20.0, s in 0.0f64..2.0) {
        let c = cfg(1e-9);
        let f = funcat::from_key("arccot").unwrap();
        let a = normcalc::ds_norm(&f, s, &c).unwrap().value;
        let b = normcalc::ds_norm(&funcat::scale(&f, t), s, &c).unwrap().value;
        prop_assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    /// Triangle inequality for sums of resolvents.
    #[test]
    fn ds_norm_triangle_inequality(l1 in 0.1f64..5.0, l2 in 0.1f64..5.0, a2 in -1.2f64..1.2) {
        let c = cfg(1e-9);
        let f = funcat::resolvent(C64::new(l1, 0.0)).unwrap();
        let g = funcat::resolvent(C64::from_polar(l2, a2)).unwrap();
        let sum = funcat::lincomb(&[(C64::new(1.0, 0.0), f.clone()), (C64::new(1.0, 0.0), g.clone())]);
        let n = |h: &SectorFn| normcalc::ds_norm(h, 1.0, &c).unwrap().value;
        prop_assert!(n(&sum) <= (n(&f) + n(&g)) * (1.0 + 1e-8));
    }
}
