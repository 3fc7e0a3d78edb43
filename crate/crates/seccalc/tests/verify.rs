// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

use seccalc::funcat;
use seccalc::matops::{self, CMatrix, SectorialOp, M_SAFETY};
use seccalc::normcalc::{self, QuadConfig};
use seccalc::verify::{self, Suite, SuiteParams};
use seccalc::C64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

fn cfg(tol: f64) -> QuadConfig {
    let mut c = QuadConfig::with_tol(tol, tol);
    c.parallel = false;
    c
}

fn op(a: CMatrix) -> SectorialOp {
    SectorialOp::new(a).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn cayley_power_bound_examples() {
    assert!(close(verify::cayley_bound(1.0), 40.2, 0.05));
    let d = verify::check_cayley_powers(&op(CMatrix::from_real_diag(&[1.0, 10.0])), "d", &[50]).unwrap();
    assert!(d[0].passed && d[0].lhs <= 1.0 + 1e-12);
    let j = verify::check_cayley_powers(&op(matops::jordan2(1.0)), "j", &[50]).unwrap();
    assert!(j[0].passed);
    let i = verify::check_cayley_powers(&op(CMatrix::identity(2)), "i", &[1, 7]).unwrap();
    assert!(i.iter().all(|c| c.passed && c.lhs == 0.0));
}

#[test]
fn semigroup_bound_examples() {
    assert!(close(verify::analytic_semigroup_bound(1.0, 0.5, 1.0), 16.0, 1e-12));
    let checks = verify::check_semigroup_bounds(&op(CMatrix::from_real_diag(&[1.0, 4.0])), "d", &[0.5], &[1.0]).unwrap();
    let an = checks.iter().find(|c| c.name == "analytic semigroup").unwrap();
    assert!(close(an.lhs, (-0.5f64).exp().max(4.0 * (-2.0f64).exp()), 1e-12));
    assert!(checks.iter().all(|c| c.passed));
    let inv = verify::check_semigroup_bounds(&op(CMatrix::from_real_diag(&[2.0])), "d", &[1.0], &[]).unwrap();
    let c = inv.iter().find(|c| c.name == "inverse semigroup").unwrap();
    assert!(close(c.lhs, (-0.5f64).exp(), 1e-12) && c.rhs >= 3.0);
}

#[test]
fn analytic_function_bound_examples() {
    let e = funcat::from_key("exp").unwrap();
    let a = op(CMatrix::from_real_diag(&[1.0, 3.0]));
    let c1 = verify::check_analf(&a, "d", &e, 1, 1.0, &[1.0], &cfg(1e-8)).unwrap();
    let exp1 = c1.iter().find(|c| c.name == "analytic function (exp)").unwrap();
    assert!(close(exp1.lhs, (-1.0f64).exp(), 1e-12));
    assert!(close(verify::analf_exp_bound(1, 1.0), 8.0, 1e-12));
    let c2 = verify::check_analf(&a, "d", &e, 2, 1.0, &[1.0], &cfg(1e-8)).unwrap();
    assert!(close(c2[0].lhs, 9.0 * (-3.0f64).exp(), 1e-12));
    assert!(close(verify::analf_exp_bound(2, 1.0), 48.0, 1e-12));
    let c3 = verify::check_analf(&op(CMatrix::from_real_diag(&[1.0])), "d", &e, 1, 1.0, &[10.0], &cfg(1e-8)).unwrap();
    assert!(close(c3[0].lhs, 10.0 * (-10.0f64).exp(), 1e-15));
    assert!(c1.iter().chain(&c2).chain(&c3).all(|c| c.passed));
}

#[test]
fn bernstein_bound_examples() {
    let i = C64::new(0.0, 1.0);
    let sqrt = funcat::bernstein_from_key("sqrt").unwrap();
    let c = verify::check_bernstein(&op(CMatrix::from_real_diag(&[1.0, 4.0])), "d", &sqrt, FRAC_PI_4, FRAC_PI_2, &[i]).unwrap();
    assert!(close(c[0].lhs, 0.5f64.sqrt(), 1e-12) && c[0].passed);
    let jump = funcat::bernstein_from_key("jump:m=1,at=1").unwrap();
    let one = C64::new(1.0, 0.0);
    let c = verify::check_bernstein(&op(CMatrix::from_real_diag(&[1.0])), "d", &jump, FRAC_PI_4, FRAC_PI_2, &[one]).unwrap();
    assert!(close(c[0].lhs, 1.0 / (2.0 - (-1.0f64).exp()), 1e-12) && c[0].passed);
    let id = funcat::bernstein_from_key("id").unwrap();
    let c = verify::check_bernstein(&op(matops::jordan2(1.0)), "j", &id, FRAC_PI_4, FRAC_PI_2, &[i, -i, one]).unwrap();
    assert!(c.iter().all(|c| c.passed));
    // λ outside the sector of angle π - φ
    let bad = verify::check_bernstein(&op(CMatrix::from_real_diag(&[1.0])), "d", &id, FRAC_PI_4, 2.5, &[i]);
    assert!(bad.is_err());
}

#[test]
fn fractional_semigroup_examples() {
    let one = C64::new(1.0, 0.0);
    let c = verify::check_frac_semigroup(&op(CMatrix::from_real_diag(&[1.0])), "d", 0.5, FRAC_PI_3, &[one, C64::new(0.0, 0.0)]).unwrap();
    assert!(close(c[0].lhs, (-1.0f64).exp(), 1e-12));
    // M_{π/3}(1) = sup |z/(z+1)| over arg z = ±2π/3, i.e. 1/sin(π/3)
    let m = 1.0 / FRAC_PI_3.sin();
    assert!(close(c[0].rhs, M_SAFETY * m / (PI / 6.0).cos(), 1e-6), "{}", c[0].rhs);
    assert_eq!(c[1].lhs, 1.0);
    let rot = op(matops::rotation_scaled(2.0, FRAC_PI_3));
    let c = verify::check_frac_semigroup(&rot, "r", 0.5, 5.0 * PI / 12.0, &[one]).unwrap();
    assert!(c.iter().all(|c| c.passed));
    let r = verify::check_fractional_resolvent(&op(matops::jordan2(1.0)), "j", 0.5, &[one, C64::new(0.1, 3.0)]).unwrap();
    assert!(r.iter().all(|c| c.passed));
}

#[test]
fn cayley_norm_sandwich_examples() {
    let (lo, hi) = verify::cayley_norm_sandwich(10);
    assert!(close(lo, 5.796, 1e-3) && close(hi, 51.18, 1e-2));
    assert!(close(verify::cayley_norm_uniform_bound(1.0), 1.0 + 16.0 * (PI + 0.5f64.sqrt()), 1e-12));
    let a = verify::check_fn_asymptotics(&[1, 10], 1.0, &cfg(1e-8)).unwrap();
    assert!(a.checks.iter().all(|c| c.passed));
    // f_1 = 1 - 2 r_1 has a closed form at s = 0
    assert!(close(a.table.rows[0][1], 1.0 + 8.0 * seccalc::special::CATALAN, 1e-7));
    assert!(verify::check_fn_asymptotics(&[1], 0.0, &cfg(1e-8)).is_err());
}

#[test]
fn b_norm_grows_with_log_n() {
    let a = verify::check_fn_asymptotics(&[4, 8, 16, 32], 1.0, &cfg(1e-8)).unwrap();
    assert!(a.slope_b_log > 0.0);
}

/// The growth invariant taken literally: slope of `ln ‖f_n‖_{𝒟₀}` against
/// `ln ln n` within `1 ± 0.25` for `n ∈ {4, ..., 1024}`. The computed norms
/// follow `a + b ln n` with `a ≈ 8.7`, whose log-log slope `b L/(a + b L)`
/// only tends to 1 as `n → ∞`; the measured slope is about 0.58.
#[test]
#[ignore = "fails: log-log slope is 0.58 over n <= 1024, the slope approaches 1 only asymptotically"]
fn fn_growth_loglog_slope_literal() {
    let ns: Vec<u32> = (2..=10).map(|k| 1u32 << k).collect();
    let a = verify::check_fn_asymptotics(&ns, 1.0, &cfg(1e-8)).unwrap();
    assert!((a.slope_ds0_loglog - 1.0).abs() <= 0.25, "slope {}", a.slope_ds0_loglog);
}

#[test]
fn shift_bound_examples() {
    let c = cfg(1e-8);
    let r1 = funcat::from_key("resolvent:1").unwrap();
    let one = C64::new(1.0, 0.0);
    let checks = verify::check_shift_semigroup(&r1, 1.0, FRAC_PI_4, &[one, C64::new(0.0, 0.0)], &c).unwrap();
    assert!(checks.iter().all(|c| c.passed));
    let base = normcalc::ds_norm(&r1, 1.0, &c).unwrap().value;
    assert!(close(checks[1].lhs, base, 1e-9));
    let ac = funcat::from_key("arccot").unwrap();
    let checks = verify::check_shift_semigroup(&ac, 0.0, FRAC_PI_3, &[C64::new(1.0, 1.0)], &c).unwrap();
    assert!(checks[0].passed);
    assert!(verify::check_shift_semigroup(&ac, 0.0, FRAC_PI_4, &[C64::new(1.0, 2.0)], &c).is_err());
}

#[test]
fn rational_fit_is_exact_on_a_resolvent() {
    let r1 = funcat::from_key("resolvent:1").unwrap();
    let fit = verify::rational_fit(&r1, 0.0, &[C64::new(1.0, 0.0)], &cfg(1e-8)).unwrap();
    assert!(fit.residual < 1e-10, "{}", fit.residual);
    assert!((fit.coefficients[1] - C64::new(1.0, 0.0)).norm() < 1e-9);
    assert!(verify::rational_fit(&r1, 0.0, &[C64::new(-1.0, 0.0)], &cfg(1e-8)).is_err());
}

#[test]
fn rational_residuals_decrease_with_degree() {
    let e = funcat::from_key("exp").unwrap();
    let curve = verify::rational_curve(&e, 1.0, &[2, 4, 8], &cfg(1e-6)).unwrap();
    assert!(curve.windows(2).all(|w| w[1].residual < w[0].residual));
}

#[test]
fn convergence_experiment_decreases() {
    let v = verify::convergence_experiment(&op(CMatrix::from_real_diag(&[1.0, 2.0])), &[1.0, 4.0, 16.0, 64.0], &cfg(1e-8)).unwrap();
    assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    assert!(v[3] < 0.05);
}

#[test]
fn reduced_suite_runs_are_deterministic() {
    let p = SuiteParams {
        cayley_n: vec![1, 5],
        semigroup_t: vec![0.5],
        semigroup_nu: vec![0.5],
        random_points: 2,
        calculus_audits: false,
        ..SuiteParams::default()
    };
    let mats = matops::test_matrices();
    let c = cfg(1e-8);
    for suite in [Suite::Cayley, Suite::Semigroup, Suite::Bernstein] {
        let a = verify::run_suite(suite, &mats, &p, 7, &c).unwrap();
        let b = verify::run_suite(suite, &mats, &p, 7, &c).unwrap();
        assert!(a.passed(), "{}", suite.name());
        assert_eq!(a.checks_csv(), b.checks_csv());
    }
}
