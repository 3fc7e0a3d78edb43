// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Executable checks of the explicit operator-norm estimates.
//!
//! Each check compares a computed norm `lhs` against a closed-form bound
//! `rhs`. Bounds that involve a sectoriality constant `M_A` or `M_ψ(A)` use the
//! sampled constant times [`M_SAFETY`](crate::matops::M_SAFETY), because the sampled supremum can only
//! under-estimate the true one.
//!
//! ```
//! use seccalc::verify::{cayley_bound, check_cayley_powers};
//! use seccalc::matops::{CMatrix, SectorialOp};
//!
//! let op = SectorialOp::new(CMatrix::from_real_diag(&[1.0, 10.0])).unwrap();
//! let checks = check_cayley_powers(&op, "diag(1,10)", &[50]).unwrap();
//! assert!(checks[0].passed && checks[0].lhs <= 1.0 + 1e-12);
//! assert!((cayley_bound(1.0) - 40.2).abs() < 0.05);
//! ```

use crate::fcalc::{self, CalcReport};
use crate::funcat::{self, BernsteinFn, SectorFn};
use crate::matops::{self, expm, resolvent, CMatrix, SectorialOp, TestMatrix};
use crate::normcalc::{self, QuadConfig};
use crate::special::{beta, gamma};
use crate::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// One inequality `lhs ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub passed: bool,
    /// Ordered `(key, value)` description of the inputs.
    pub inputs: Vec<(String, String)>,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, inputs: Vec<(String, String)>) -> Self {
        BoundCheck {
            name: name.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            passed: lhs <= rhs * (1.0 + 1e-9),
            inputs,
        }
    }
}

fn kv(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// Float formatting used in reports: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn fmt_c(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{}{sign}{}i", fmt17(z.re), fmt17(z.im))
}

/// A numeric table emitted next to the checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

/// Everything one suite produced.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<BoundCheck>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: Vec::new(),
            tables: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn pass_count(&self) -> usize {
        self.checks.iter().filter(|c| c.passed).count()
    }

    /// The checks as CSV.
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("name,lhs,rhs,margin,passed,inputs\n");
        for c in &self.checks {
            let inputs = c.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
            out.push_str(&format!(
                "{},{},{},{},{},\"{}\"\n",
                c.name,
                fmt17(c.lhs),
                fmt17(c.rhs),
                fmt17(c.margin),
                c.passed,
                inputs.replace('"', "'")
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Cayley,
    Semigroup,
    Analf,
    Bernstein,
    Frac,
    FnAsymptotics,
    Shift,
    Rational,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Cayley,
        Suite::Semigroup,
        Suite::Analf,
        Suite::Bernstein,
        Suite::Frac,
        Suite::FnAsymptotics,
        Suite::Shift,
        Suite::Rational,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Cayley => "cayley",
            Suite::Semigroup => "semigroup",
            Suite::Analf => "analf",
            Suite::Bernstein => "bernstein",
            Suite::Frac => "frac",
            Suite::FnAsymptotics => "fn-asymptotics",
            Suite::Shift => "shift",
            Suite::Rational => "rational",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, Error> {
        Suite::ALL
            .iter()
            .copied()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown suite '{name}'")))
    }
}

fn m_a(op: &SectorialOp) -> Result<f64, Error> {
    op.m_upper(FRAC_PI_2)
}

fn require_below_half_pi(op: &SectorialOp) -> Result<(), Error> {
    if op.theta_est >= FRAC_PI_2 {
        return Err(Error::Precondition(format!(
            "spectral angle {:.6} is not below pi/2",
            op.theta_est
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Cayley transform and semigroups

/// `1 + 32(1 + 1/(√2π)) M²`.
pub fn cayley_bound(m: f64) -> f64 {
    1.0 + 32.0 * (1.0 + 1.0 / (SQRT_2 * PI)) * m * m
}

/// `V(A) = (A - I)(A + I)^{-1}`.
pub fn cayley_transform(a: &CMatrix) -> Result<CMatrix, Error> {
    Ok(a.shift(C64::new(-1.0, 0.0)).mul(&resolvent(a, C64::new(1.0, 0.0))?))
}

/// `‖V(A)^n‖ ≤ 1 + 32(1 + 1/(√2π)) M_A²`.
pub fn check_cayley_powers(op: &SectorialOp, label: &str, n_list: &[u32]) -> Result<Vec<BoundCheck>, Error> {
    require_below_half_pi(op)?;
    let m = m_a(op)?;
    let v = cayley_transform(&op.a)?;
    let rhs = cayley_bound(m);
    Ok(n_list
        .iter()
        .map(|&n| {
            let lhs = v.powi(n).norm2();
            BoundCheck::new(
                "cayley power",
                lhs,
                rhs,
                kv(&[("matrix", label.into()), ("n", n.to_string()), ("M", fmt17(m))]),
            )
        })
        .collect())
}

/// `2^{ν+2} t^{-ν} Γ(ν+1) M^{⌈ν⌉+2}`.
pub fn analytic_semigroup_bound(nu: f64, t: f64, m: f64) -> f64 {
    2f64.powf(nu + 2.0) * t.powf(-nu) * gamma(nu + 1.0) * m.powi(nu.ceil() as i32 + 2)
}

/// Bounds for `e^{-tA}`, `A^ν e^{-tA}`, `e^{-tA^{-1}}` and
/// `A^{-ν} e^{-tA^{-1}}`.
pub fn check_semigroup_bounds(op: &SectorialOp, label: &str, t_list: &[f64], nu_list: &[f64]) -> Result<Vec<BoundCheck>, Error> {
    require_below_half_pi(op)?;
    let m = m_a(op)?;
    let inv = SectorialOp::new(op.a.inverse()?)?;
    let mut out = Vec::new();
    let powers: Vec<(f64, CMatrix, CMatrix)> = nu_list
        .iter()
        .map(|&nu| Ok((nu, op.frac_power(nu)?, inv.frac_power(nu)?)))
        .collect::<Result<_, Error>>()?;
    for &t in t_list {
        let e = expm(&op.a, t);
        let e_inv = expm(&inv.a, t);
        let base = |extra: &[(&str, String)]| {
            let mut v = kv(&[("matrix", label.into()), ("t", fmt17(t)), ("M", fmt17(m))]);
            v.extend(kv(extra));
            v
        };
        out.push(BoundCheck::new("semigroup", e.norm2(), 2.0 * m * m, base(&[])));
        out.push(BoundCheck::new("inverse semigroup", e_inv.norm2(), 1.0 + 2.0 * m * m, base(&[])));
        for (nu, p, p_inv) in &powers {
            let rhs = analytic_semigroup_bound(*nu, t, m);
            out.push(BoundCheck::new("analytic semigroup", p.mul(&e).norm2(), rhs, base(&[("nu", fmt17(*nu))])));
            out.push(BoundCheck::new(
                "inverse analytic semigroup",
                p_inv.mul(&e_inv).norm2(),
                rhs,
                base(&[("nu", fmt17(*nu))]),
            ));
        }
    }
    Ok(out)
}

/// `2^s Γ(s+n+1)/(π Γ(s+1)) (M+1)^n M^{⌈s⌉+1} ‖f‖_{𝒟ₛ}`.
pub fn analf_bound(n: u32, s: f64, m: f64, ds: f64) -> f64 {
    let nf = f64::from(n);
    2f64.powf(s) * gamma(s + nf + 1.0) / (PI * gamma(s + 1.0)) * (m + 1.0).powi(n as i32) * m.powi(s.ceil() as i32 + 1) * ds
}

/// `2(n+1)! (M+1)^n M²`, the bound for `f = e^{-z}`.
pub fn analf_exp_bound(n: u32, m: f64) -> f64 {
    2.0 * crate::special::factorial(n + 1) * (m + 1.0).powi(n as i32) * m * m
}

/// `‖tⁿ Aⁿ f⁽ⁿ⁾(tA)‖` against the analytic-function bound, and for `e^{-z}`
/// also against its closed form.
pub fn check_analf(
    op: &SectorialOp,
    label: &str,
    f: &SectorFn,
    n: u32,
    s: f64,
    t_list: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<BoundCheck>, Error> {
    require_below_half_pi(op)?;
    let m = m_a(op)?;
    let ds = normcalc::ds_norm(f, s, cfg)?;
    if ds.divergent {
        return Err(Error::Divergent(format!("{} is not in D_{s}", f.key())));
    }
    let is_exp = f.key() == "exp_poly:nu=0,t=1";
    let rhs = analf_bound(n, s, m, ds.value);
    let mut out = Vec::new();
    for &t in t_list {
        let ta = op.a.scale(C64::new(t, 0.0));
        let lhs = if is_exp {
            ta.powi(n).mul(&expm(&op.a, t)).norm2()
        } else {
            nth_power_term(op, f, n, t)?.norm2()
        };
        let inputs = kv(&[
            ("matrix", label.into()),
            ("f", f.key().into()),
            ("n", n.to_string()),
            ("s", fmt17(s)),
            ("t", fmt17(t)),
            ("M", fmt17(m)),
        ]);
        out.push(BoundCheck::new("analytic function", lhs, rhs, inputs.clone()));
        if is_exp {
            out.push(BoundCheck::new("analytic function (exp)", lhs, analf_exp_bound(n, m), inputs));
        }
    }
    Ok(out)
}

/// `(tA)ⁿ f⁽ⁿ⁾(tA)` through the eigendecomposition or the Jordan formula.
fn nth_power_term(op: &SectorialOp, f: &SectorFn, n: u32, t: f64) -> Result<CMatrix, Error> {
    let k = n as usize;
    let missing = || Error::Unsupported(format!("{} has no exact derivative of order {}", f.key(), k + 1));
    let g = |z: C64| (z * t).powi(n as i32) * f.nth(k, z * t).unwrap_or(C64::new(f64::NAN, 0.0));
    let a = &op.a;
    if a.n() == 2 && a[(1, 0)] == C64::new(0.0, 0.0) && a[(0, 0)] == a[(1, 1)] && a[(0, 1)] != C64::new(0.0, 0.0) {
        let l = a[(0, 0)];
        let nf = f64::from(n);
        let dn = f.nth(k, l * t).ok_or_else(missing)?;
        let dn1 = f.nth(k + 1, l * t).ok_or_else(missing)?;
        // d/dz (tz)ⁿ f⁽ⁿ⁾(tz)
        let dg = t * (nf * (l * t).powi(n as i32 - 1) * dn + (l * t).powi(n as i32) * dn1);
        return CMatrix::from_rows(&[vec![g(l), a[(0, 1)] * dg], vec![C64::new(0.0, 0.0), g(l)]]);
    }
    f.nth(k, C64::new(1.0, 0.0)).ok_or_else(missing)?;
    op.eig_function(&g)
}

// ---------------------------------------------------------------------------
// Bernstein functions

/// `2 M (1/sin(min(φ, π/2)) + 2/(cos ψ sin²((φ-ψ)/2)))`.
pub fn bernstein_bound(m_psi: f64, psi: f64, phi: f64) -> f64 {
    let h = ((phi - psi) / 2.0).sin();
    2.0 * m_psi * (1.0 / phi.min(FRAC_PI_2).sin() + 2.0 / (psi.cos() * h * h))
}

/// `g(A)`: series of matrix exponentials for atomic Lévy measures, the
/// eigendecomposition otherwise (with the exact `2×2` Jordan formula).
pub fn bernstein_apply(op: &SectorialOp, g: &BernsteinFn) -> Result<CMatrix, Error> {
    let n = op.n();
    if g.density.is_none() {
        let mut out = CMatrix::identity(n).scale(C64::new(g.a, 0.0));
        out.axpy_c(C64::new(g.b, 0.0), &op.a);
        for &(mass, at) in &g.atoms {
            out.axpy_c(C64::new(mass, 0.0), &CMatrix::identity(n).sub(&expm(&op.a, at)));
        }
        return Ok(out);
    }
    let a = &op.a;
    let zero = C64::new(0.0, 0.0);
    if n == 2 && a[(1, 0)] == zero && a[(0, 0)] == a[(1, 1)] && a[(0, 1)] != zero {
        let l = a[(0, 0)];
        return CMatrix::from_rows(&[vec![g.eval(l), a[(0, 1)] * g.deriv(l)], vec![zero, g.eval(l)]]);
    }
    if !op.is_diagonalizable() {
        return Err(Error::Unsupported(format!("{} of a defective matrix", g.key())));
    }
    op.eig_function(&|z| g.eval(z))
}

/// `‖λ(λ + g(A))^{-1}‖` on the boundary of `Σ_{π-φ}`.
pub fn check_bernstein(
    op: &SectorialOp,
    label: &str,
    g: &BernsteinFn,
    psi: f64,
    phi: f64,
    lambda_list: &[C64],
) -> Result<Vec<BoundCheck>, Error> {
    if !(op.theta_est < psi && psi < FRAC_PI_2 && psi < phi && phi < PI) {
        return Err(Error::Precondition(format!(
            "need theta < psi < pi/2 and psi < phi < pi, got theta={:.6}, psi={psi}, phi={phi}",
            op.theta_est
        )));
    }
    if let Some(l) = lambda_list.iter().find(|l| l.norm() == 0.0 || l.arg().abs() > PI - phi + 1e-12) {
        return Err(Error::Precondition(format!("lambda {l} lies outside the sector of angle pi - phi")));
    }
    let m = op.m_upper(psi)?;
    let ga = bernstein_apply(op, g)?;
    let rhs = bernstein_bound(m, psi, phi);
    lambda_list
        .iter()
        .map(|&l| {
            let lhs = l.norm() * resolvent(&ga, l)?.norm2();
            Ok(BoundCheck::new(
                "bernstein resolvent",
                lhs,
                rhs,
                kv(&[
                    ("matrix", label.into()),
                    ("g", g.key().into()),
                    ("psi", fmt17(psi)),
                    ("phi", fmt17(phi)),
                    ("lambda", fmt_c(l)),
                    ("M_psi", fmt17(m)),
                ]),
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fractional powers

/// `½(1/cos(γψ+φ) + 1/cos(γψ-φ)) M`.
pub fn frac_semigroup_bound(gamma_: f64, psi: f64, phi: f64, m: f64) -> f64 {
    let a = gamma_ * psi;
    0.5 * (1.0 / (a + phi).cos() + 1.0 / (a - phi).cos()) * m
}

/// `‖e^{-λA^γ}‖` for `λ ∈ Σ_{π/2-γψ}`.
///
/// The constant is `M_ψ(A)`: the estimate follows from the arccot form of the
/// `ℋ`-calculus applied to `z ↦ e^{-λz^γ}` on `Σ_ψ`.
pub fn check_frac_semigroup(
    op: &SectorialOp,
    label: &str,
    gamma_: f64,
    psi: f64,
    lambda_list: &[C64],
) -> Result<Vec<BoundCheck>, Error> {
    if !(gamma_ > 0.0 && gamma_ * psi < FRAC_PI_2) {
        return Err(Error::Precondition(format!("need gamma*psi < pi/2, got {}", gamma_ * psi)));
    }
    let m = op.m_upper(psi)?;
    let b = op.frac_power(gamma_)?;
    let room = FRAC_PI_2 - gamma_ * psi;
    lambda_list
        .iter()
        .map(|&l| {
            let phi = if l.norm() == 0.0 { 0.0 } else { l.arg() };
            if phi.abs() >= room {
                return Err(Error::Precondition(format!("lambda {l} lies outside the sector of angle {room:.6}")));
            }
            let lhs = if l.norm() == 0.0 { 1.0 } else { expm(&b.scale(l), 1.0).norm2() };
            Ok(BoundCheck::new(
                "fractional semigroup",
                lhs,
                frac_semigroup_bound(gamma_, psi, phi, m),
                kv(&[
                    ("matrix", label.into()),
                    ("gamma", fmt17(gamma_)),
                    ("psi", fmt17(psi)),
                    ("lambda", fmt_c(l)),
                    ("M_psi", fmt17(m)),
                ]),
            ))
        })
        .collect()
}

/// `‖(A+z)^{-γ}‖ ≤ M_A^{⌈γ⌉}/|z|^γ` for `z ∈ ℂ₊`.
pub fn check_fractional_resolvent(op: &SectorialOp, label: &str, gamma_: f64, z_list: &[C64]) -> Result<Vec<BoundCheck>, Error> {
    require_below_half_pi(op)?;
    let m = m_a(op)?;
    z_list
        .iter()
        .map(|&z| {
            if !(z.re > 0.0) {
                return Err(Error::Precondition(format!("z = {z} is not in the right half-plane")));
            }
            let r = if op.is_diagonalizable() {
                op.resolvent_frac(z, gamma_)?
            } else {
                op.resolvent_frac_stieltjes(z, gamma_)?
            };
            Ok(BoundCheck::new(
                "fractional resolvent",
                r.norm2(),
                m.powi(gamma_.ceil() as i32) / z.norm().powf(gamma_),
                kv(&[
                    ("matrix", label.into()),
                    ("gamma", fmt17(gamma_)),
                    ("z", fmt_c(z)),
                    ("M", fmt17(m)),
                ]),
            ))
        })
        .collect()
}

/// The norm bound a calculus call asserted, as a check.
pub fn audit(name: &str, rep: &CalcReport, inputs: Vec<(String, String)>) -> Option<BoundCheck> {
    rep.bound.map(|b| BoundCheck::new(name, b.lhs, b.rhs, inputs))
}

// ---------------------------------------------------------------------------
// Cayley powers in function space

/// `1 + 16(B(s/2, 1/2) + 2^{-s/2})`.
pub fn cayley_norm_uniform_bound(s: f64) -> f64 {
    1.0 + 16.0 * (beta(s / 2.0, 0.5) + 2f64.powf(-s / 2.0))
}

/// `(1 + 2 ln(n+1), 8(4 + ln(n+1)))`.
pub fn cayley_norm_sandwich(n: u32) -> (f64, f64) {
    let l = f64::from(n + 1).ln();
    (1.0 + 2.0 * l, 8.0 * (4.0 + l))
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Result of [`check_fn_asymptotics`].
#[derive(Clone, Debug)]
pub struct FnAsymptotics {
    pub checks: Vec<BoundCheck>,
    pub table: Table,
    /// Slope of `ln ‖f_n‖_{𝒟₀}` against `ln ln n` over the `n ≥ 4` rows.
    pub slope_ds0_loglog: f64,
    /// Slope of `‖f_n‖_ℬ` against `ln n` over the `n ≥ 4` rows.
    pub slope_b_log: f64,
}

/// Norms of `f_n = ((z-1)/(z+1))ⁿ`: the log sandwich at `s = 0`, the uniform
/// bound at `s > 0`, and a growth table with `ℬ` and (for `n ≤ 8`) `HP`
/// columns.
pub fn check_fn_asymptotics(n_list: &[u32], s: f64, cfg: &QuadConfig) -> Result<FnAsymptotics, Error> {
    if !(s > 0.0) {
        return Err(Error::Precondition(format!("the uniform bound needs s > 0, got {s}")));
    }
    let uniform = cayley_norm_uniform_bound(s);
    let mut checks = Vec::new();
    let mut table = Table::new("cayley-norms", &["n", "ds0", "ds_s", "b_norm", "hp_norm"]);
    for &n in n_list {
        let f = funcat::make_cayley_power(n)?;
        let d0 = finite(normcalc::ds_norm(&f, 0.0, cfg)?, &f)?;
        let ds = finite(normcalc::ds_norm(&f, s, cfg)?, &f)?;
        let b = finite(normcalc::b_norm(&f, cfg)?, &f)?;
        let hp = if n <= 8 { finite(normcalc::hp_norm(&f, cfg)?, &f)? } else { f64::NAN };
        let (lo, hi) = cayley_norm_sandwich(n);
        let inputs = kv(&[("n", n.to_string())]);
        checks.push(BoundCheck::new("log sandwich lower", lo, d0, inputs.clone()));
        checks.push(BoundCheck::new("log sandwich upper", d0, hi, inputs.clone()));
        let mut with_s = inputs;
        with_s.push(("s".into(), fmt17(s)));
        checks.push(BoundCheck::new("uniform bound", ds, uniform, with_s));
        table.rows.push(vec![f64::from(n), d0, ds, b, hp]);
    }
    let big: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[0] >= 4.0).collect();
    let (slope_ds0_loglog, slope_b_log) = if big.len() >= 2 {
        let lnn: Vec<f64> = big.iter().map(|r| r[0].ln()).collect();
        let x: Vec<f64> = lnn.iter().map(|l| l.ln()).collect();
        let y: Vec<f64> = big.iter().map(|r| r[1].ln()).collect();
        let b: Vec<f64> = big.iter().map(|r| r[3]).collect();
        (ls_slope(&x, &y), ls_slope(&lnn, &b))
    } else {
        (f64::NAN, f64::NAN)
    };
    if slope_b_log.is_finite() {
        checks.push(BoundCheck::new("b_norm grows with ln n", 0.0, slope_b_log, vec![]));
    }
    Ok(FnAsymptotics {
        checks,
        table,
        slope_ds0_loglog,
        slope_b_log,
    })
}

fn finite(r: normcalc::NormResult, f: &SectorFn) -> Result<f64, Error> {
    if r.divergent || !r.value.is_finite() {
        return Err(Error::Divergent(format!(
            "norm of {} did not converge: {}",
            f.key(),
            r.diagnostic.unwrap_or_default()
        )));
    }
    Ok(r.value)
}

// ---------------------------------------------------------------------------
// Shifts

/// `C_{a,s}` with `a = tan ψ`:
/// `(s+1) 2^s B((s+1)/2, 1/2) / (π cos ψ cos^{s+2} ψ_a) + 2^{s+1}`,
/// `ψ_a = arctan(a + √(1+a²))`.
pub fn shift_constant(psi: f64, s: f64) -> f64 {
    let a = psi.tan();
    let psi_a = (a + (1.0 + a * a).sqrt()).atan();
    (s + 1.0) * 2f64.powf(s) * beta((s + 1.0) / 2.0, 0.5) / (PI * psi.cos() * psi_a.cos().powf(s + 2.0)) + 2f64.powf(s + 1.0)
}

/// `‖f(· + τ)‖_{𝒟ₛ} ≤ C_{a,s} ‖f‖_{𝒟ₛ}` for `τ ∈ Σ̄_ψ`.
pub fn check_shift_semigroup(
    f: &SectorFn,
    s: f64,
    psi: f64,
    tau_list: &[C64],
    cfg: &QuadConfig,
) -> Result<Vec<BoundCheck>, Error> {
    if !(psi > 0.0 && psi < FRAC_PI_2) {
        return Err(Error::Precondition(format!("shift sector angle must lie in (0, pi/2), got {psi}")));
    }
    let base = finite(normcalc::ds_norm(f, s, cfg)?, f)?;
    let c = shift_constant(psi, s);
    tau_list
        .iter()
        .map(|&tau| {
            if tau.norm() > 0.0 && tau.arg().abs() > psi + 1e-12 {
                return Err(Error::Precondition(format!("tau = {tau} lies outside the sector of angle {psi}")));
            }
            let g = funcat::shift(f, tau);
            let lhs = finite(normcalc::ds_norm(&g, s, cfg)?, &g)?;
            Ok(BoundCheck::new(
                "shift",
                lhs,
                c * base,
                kv(&[
                    ("f", f.key().into()),
                    ("s", fmt17(s)),
                    ("psi", fmt17(psi)),
                    ("tau", fmt_c(tau)),
                    ("C", fmt17(c)),
                ]),
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rational approximation

/// The `k`-th pole of the nested grid in `ℂ₊`: radii spread over
/// `[10⁻², 10²]`, angles over `|arg| ≤ 0.4π`, both by additive recurrences so
/// that every prefix is well spread.
pub fn pole_sequence(k: usize) -> Vec<C64> {
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    (0..k)
        .map(|j| {
            let u = (0.5 + j as f64 * golden).fract();
            let v = (0.5 + j as f64 * SQRT_2).fract();
            C64::from_polar(10f64.powf(4.0 * u - 2.0), 0.8 * FRAC_PI_2 * (2.0 * v - 1.0))
        })
        .collect()
}

/// Sample points: five rays in `ℂ₊`, 60 radii on `[10⁻³, 10³]`.
fn fit_samples() -> Vec<C64> {
    let angles = [0.0, PI / 6.0, -PI / 6.0, PI / 3.0, -PI / 3.0, 0.45 * PI, -0.45 * PI];
    let mut out = Vec::new();
    for a in angles {
        for k in 0..60 {
            let r = 10f64.powf(-3.0 + 6.0 * k as f64 / 59.0);
            out.push(C64::from_polar(r, a));
        }
    }
    out
}

/// A fit `a₀ + Σ a_k (z + λ_k)^{-1}` and its residual norm.
#[derive(Clone, Debug)]
pub struct RationalFit {
    pub poles: Vec<C64>,
    /// `a₀` first.
    pub coefficients: Vec<C64>,
    pub residual: f64,
}

/// Least-squares fit of `a₀ + Σ a_k r_{λ_k}` to `f` on a fixed sample grid,
/// with the residual measured in `𝒟ₛ`. The normal equations of the
/// column-normalised system carry a `10⁻¹²` diagonal shift.
pub fn rational_fit(f: &SectorFn, s: f64, poles: &[C64], cfg: &QuadConfig) -> Result<RationalFit, Error> {
    if let Some(p) = poles.iter().find(|p| !(p.re > 0.0)) {
        return Err(Error::Domain(format!("pole parameter {p} is not in the right half-plane")));
    }
    let pts = fit_samples();
    let cols = poles.len() + 1;
    let col = |j: usize, z: C64| if j == 0 { C64::new(1.0, 0.0) } else { (z + poles[j - 1]).inv() };
    let rows: Vec<Vec<C64>> = pts.iter().map(|&z| (0..cols).map(|j| col(j, z)).collect()).collect();
    let y: Vec<C64> = pts.iter().map(|&z| f.eval(z)).collect();
    let scale: Vec<f64> = (0..cols)
        .map(|j| rows.iter().map(|r| r[j].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut normal = CMatrix::zeros(cols);
    let mut rhs = CMatrix::zeros(cols);
    for (r, yv) in rows.iter().zip(&y) {
        for i in 0..cols {
            let ri = r[i].conj() / scale[i];
            for j in 0..cols {
                normal[(i, j)] += ri * r[j] / scale[j];
            }
            rhs[(i, 0)] += ri * yv;
        }
    }
    for i in 0..cols {
        normal[(i, i)] += C64::new(1e-12, 0.0);
    }
    let sol = matops::lu_solve(&normal, &rhs)?;
    let coefficients: Vec<C64> = (0..cols).map(|j| sol[(j, 0)] / scale[j]).collect();
    let mut terms = vec![(C64::new(1.0, 0.0), f.clone()), (-coefficients[0], funcat::constant(C64::new(1.0, 0.0)))];
    for (a, p) in coefficients[1..].iter().zip(poles) {
        terms.push((-a, funcat::resolvent(*p)?));
    }
    let resid_fn = funcat::lincomb(&terms);
    let residual = finite(normcalc::ds_norm(&resid_fn, s, cfg)?, &resid_fn)?;
    Ok(RationalFit {
        poles: poles.to_vec(),
        coefficients,
        residual,
    })
}

/// Residuals for nested pole sets of the given sizes.
pub fn rational_curve(f: &SectorFn, s: f64, degrees: &[usize], cfg: &QuadConfig) -> Result<Vec<RationalFit>, Error> {
    degrees.iter().map(|&d| rational_fit(f, s, &pole_sequence(d), cfg)).collect()
}

// ---------------------------------------------------------------------------
// Convergence experiment

/// `‖(I - e_k(A)) g(A)‖` for `e_k(z) = e^{-z/k}` and `g(z) = z(1+z)^{-2}`,
/// both through the `𝒟`-calculus at `s = 1`.
pub fn convergence_experiment(op: &SectorialOp, ks: &[f64], cfg: &QuadConfig) -> Result<Vec<f64>, Error> {
    let g = funcat::make_zres(2, C64::new(1.0, 0.0))?;
    let ga = fcalc::d_calc(&g, op, 1.0, cfg)?.result;
    let id = CMatrix::identity(op.n());
    ks.iter()
        .map(|&k| {
            let e = funcat::make_exp_poly(0.0, 1.0 / k)?;
            let ea = fcalc::d_calc(&e, op, 1.0, cfg)?.result;
            Ok(id.sub(&ea).mul(&ga).norm2())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Suites

/// Parameter grids of the suites.
#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub cayley_n: Vec<u32>,
    pub semigroup_t: Vec<f64>,
    pub semigroup_nu: Vec<f64>,
    pub analf_n: Vec<u32>,
    pub analf_t: Vec<f64>,
    pub bernstein_g: Vec<String>,
    pub frac_gamma: Vec<f64>,
    pub fractional_resolvent_gamma: Vec<f64>,
    /// Random probe points per matrix.
    pub random_points: usize,
    pub fn_n: Vec<u32>,
    pub fn_s: f64,
    pub rational_degrees: Vec<usize>,
    /// Run the calculus audits (`𝒟`, arccot and its kernel) in the cayley and
    /// frac suites.
    pub calculus_audits: bool,
}

impl Default for SuiteParams {
    fn default() -> Self {
        let mut fn_n: Vec<u32> = (1..=64).collect();
        fn_n.extend([100, 128, 256, 512, 1024]);
        SuiteParams {
            cayley_n: vec![1, 2, 5, 10, 50, 100],
            semigroup_t: vec![1e-3, 0.1, 0.5, 1.0, 5.0],
            semigroup_nu: vec![0.5, 1.0, 2.0],
            analf_n: vec![1, 2, 3],
            analf_t: vec![0.1, 1.0, 10.0],
            bernstein_g: ["sqrt", "id", "jump:m=1,at=1", "power:alpha=0.3"].iter().map(|s| s.to_string()).collect(),
            frac_gamma: vec![0.5, 1.0],
            fractional_resolvent_gamma: vec![0.5, 1.5],
            random_points: 4,
            fn_n,
            fn_s: 1.0,
            rational_degrees: vec![2, 4, 8, 16],
            calculus_audits: true,
        }
    }
}

fn suite_rng(seed: u64, suite: Suite) -> ChaCha8Rng {
    let salt = Suite::ALL.iter().position(|s| *s == suite).unwrap_or(0) as u64;
    ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(salt + 1)))
}

struct Prepared {
    label: String,
    op: SectorialOp,
}

fn prepare(matrices: &[TestMatrix]) -> Result<Vec<Prepared>, Error> {
    matrices
        .iter()
        .map(|m| {
            Ok(Prepared {
                label: m.name.clone(),
                op: SectorialOp::new(m.a.clone())?,
            })
        })
        .collect()
}

fn skip_note(label: &str, why: &str) -> String {
    format!("{label}: skipped, {why}")
}

/// Run one suite over the given matrices.
pub fn run_suite(
    suite: Suite,
    matrices: &[TestMatrix],
    params: &SuiteParams,
    seed: u64,
    cfg: &QuadConfig,
) -> Result<SuiteReport, Error> {
    let mut rep = SuiteReport::new(suite);
    let mut rng = suite_rng(seed, suite);
    let ops = prepare(matrices)?;
    let sectorial = |p: &Prepared| p.op.theta_est < FRAC_PI_2 && p.op.eigvals.iter().all(|l| l.norm() > 0.0);
    match suite {
        Suite::Cayley => {
            for p in &ops {
                if !sectorial(p) {
                    rep.notes.push(skip_note(&p.label, "spectral angle is not below pi/2"));
                    continue;
                }
                rep.checks.extend(check_cayley_powers(&p.op, &p.label, &params.cayley_n)?);
            }
            if params.calculus_audits {
                for p in ops.iter().filter(|p| sectorial(p)).filter(|p| p.op.n() <= 2 && p.label != "diag(1)") {
                    for n in [1u32, 3] {
                        let f = funcat::make_cayley_power(n)?;
                        let r = fcalc::d_calc(&f, &p.op, 1.0, cfg)?;
                        let direct = cayley_transform(&p.op.a)?.powi(n);
                        let inputs = kv(&[("matrix", p.label.clone()), ("f", f.key().into()), ("s", fmt17(1.0))]);
                        rep.checks.extend(audit("d-calculus bound", &r, inputs.clone()));
                        rep.checks.push(BoundCheck::new("d-calculus matches V(A)^n", r.result.sub(&direct).norm2(), 1e-6, inputs));
                    }
                }
            }
        }
        Suite::Semigroup => {
            for p in ops.iter() {
                if !sectorial(p) {
                    rep.notes.push(skip_note(&p.label, "spectral angle is not below pi/2"));
                    continue;
                }
                rep.checks.extend(check_semigroup_bounds(&p.op, &p.label, &params.semigroup_t, &params.semigroup_nu)?);
            }
        }
        Suite::Analf => {
            let f = funcat::make_exp_poly(0.0, 1.0)?;
            for p in ops.iter() {
                if !sectorial(p) {
                    rep.notes.push(skip_note(&p.label, "spectral angle is not below pi/2"));
                    continue;
                }
                for &n in &params.analf_n {
                    rep.checks.extend(check_analf(&p.op, &p.label, &f, n, 1.0, &params.analf_t, cfg)?);
                }
            }
        }
        Suite::Bernstein => {
            let gs: Vec<BernsteinFn> = params
                .bernstein_g
                .iter()
                .map(|k| funcat::bernstein_from_key(k))
                .collect::<Result<_, _>>()?;
            for p in ops.iter() {
                if !sectorial(p) {
                    rep.notes.push(skip_note(&p.label, "spectral angle is not below pi/2"));
                    continue;
                }
                let psi = (p.op.theta_est + FRAC_PI_2) / 2.0;
                for phi in [(psi + FRAC_PI_2) / 2.0, FRAC_PI_2, 0.75 * PI] {
                    let mut lambdas = Vec::new();
                    for r in [0.01, 0.1, 1.0, 10.0, 100.0] {
                        lambdas.push(C64::from_polar(r, PI - phi));
                        lambdas.push(C64::from_polar(r, phi - PI));
                    }
                    for _ in 0..params.random_points {
                        let r = 10f64.powf(rng.gen_range(-2.0..2.0));
                        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        lambdas.push(C64::from_polar(r, sign * (PI - phi)));
                    }
                    for g in &gs {
                        match check_bernstein(&p.op, &p.label, g, psi, phi, &lambdas) {
                            Ok(c) => rep.checks.extend(c),
                            Err(Error::Unsupported(why)) => rep.notes.push(skip_note(&p.label, &why)),
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
        Suite::Frac => run_frac(&mut rep, &ops, params, &mut rng, cfg)?,
        Suite::FnAsymptotics => {
            let r = check_fn_asymptotics(&params.fn_n, params.fn_s, cfg)?;
            rep.checks.extend(r.checks);
            rep.tables.push(r.table);
            let mut growth = Table::new("growth", &["slope_ln_ds0_vs_lnln_n", "slope_b_vs_ln_n"]);
            growth.rows.push(vec![r.slope_ds0_loglog, r.slope_b_log]);
            rep.tables.push(growth);
            rep.notes.push("hp_norm is reported for n <= 8 only; for larger n its growth like sqrt(n) is not computed".into());
        }
        Suite::Shift => run_shift(&mut rep, cfg)?,
        Suite::Rational => {
            // the residual curve is empirical evidence; 1e-6 is plenty
            let loose = QuadConfig {
                abs_tol: cfg.abs_tol.max(1e-6),
                rel_tol: cfg.rel_tol.max(1e-6),
                ..cfg.clone()
            };
            let cfg = &loose;
            let r1 = funcat::resolvent(C64::new(1.0, 0.0))?;
            let exact = rational_fit(&r1, 1.0, &[C64::new(1.0, 0.0)], cfg)?;
            rep.checks.push(BoundCheck::new("exact representation", exact.residual, 1e-10, kv(&[("f", r1.key().into())])));
            let mut table = Table::new("rational-residuals", &["case", "degree", "residual"]);
            for (case, (key, s)) in [("arccot", 0.0), ("exp", 1.0)].iter().enumerate() {
                let f = funcat::from_key(key)?;
                let curve = rational_curve(&f, *s, &params.rational_degrees, cfg)?;
                for fit in &curve {
                    table.rows.push(vec![case as f64, fit.poles.len() as f64, fit.residual]);
                }
                for w in curve.windows(2) {
                    rep.checks.push(BoundCheck::new(
                        "residual non-increasing",
                        w[1].residual,
                        w[0].residual,
                        kv(&[
                            ("f", f.key().into()),
                            ("s", fmt17(*s)),
                            ("degrees", format!("{}->{}", w[0].poles.len(), w[1].poles.len())),
                        ]),
                    ));
                }
            }
            rep.tables.push(table);
            rep.notes.push("case 0 = arccot in D_0, case 1 = exp(-z) in D_1".into());
        }
    }
    Ok(rep)
}

fn run_frac(rep: &mut SuiteReport, ops: &[Prepared], params: &SuiteParams, rng: &mut ChaCha8Rng, cfg: &QuadConfig) -> Result<(), Error> {
    for p in ops {
        if p.op.eigvals.iter().any(|l| l.norm() == 0.0) {
            rep.notes.push(skip_note(&p.label, "matrix is singular"));
            continue;
        }
        for &g in &params.frac_gamma {
            let top = (PI / (2.0 * g)).min(PI);
            if p.op.theta_est >= top {
                rep.notes.push(skip_note(&p.label, &format!("no admissible psi for gamma = {g}")));
                continue;
            }
            let psi = (p.op.theta_est + top) / 2.0;
            let room = FRAC_PI_2 - g * psi;
            let mut lambdas = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
            for r in [0.5, 2.0] {
                lambdas.push(C64::from_polar(r, 0.8 * room));
                lambdas.push(C64::from_polar(r, -0.8 * room));
            }
            for _ in 0..params.random_points {
                let r = 10f64.powf(rng.gen_range(-1.0..1.0));
                lambdas.push(C64::from_polar(r, rng.gen_range(-0.95..0.95) * room));
            }
            rep.checks.extend(check_frac_semigroup(&p.op, &p.label, g, psi, &lambdas)?);
        }
        if p.op.theta_est < FRAC_PI_2 {
            for &g in &params.fractional_resolvent_gamma {
                let zs: Vec<C64> = (0..20)
                    .map(|_| {
                        let r = 10f64.powf(rng.gen_range(-2.0..2.0));
                        C64::from_polar(r, rng.gen_range(-0.49..0.49) * PI)
                    })
                    .collect();
                rep.checks.extend(check_fractional_resolvent(&p.op, &p.label, g, &zs)?);
            }
        }
    }
    if !params.calculus_audits {
        return Ok(());
    }
    // the arccot kernel on both sides of pi/2
    for (label, psi) in [("diag(1,4)", FRAC_PI_2), ("jordan(1)", PI / 3.0), ("rot(2,pi/3)", 5.0 * PI / 12.0), ("rot(2,2pi/3)", 0.75 * PI)] {
        let Some(p) = ops.iter().find(|p| p.label == label) else { continue };
        let r = fcalc::arccot_int(&p.op, psi, 1.0, cfg)?;
        let inputs = kv(&[("matrix", label.into()), ("psi", fmt17(psi))]);
        rep.checks.extend(audit("arccot kernel bound", &r, inputs));
    }
    // e^{-λA^γ} through the arccot formula against the matrix exponential
    for (label, g, psi) in [("diag(1,4)", 0.5, PI / 3.0), ("rot(2,pi/3)", 0.5, 5.0 * PI / 12.0), ("jordan(1)", 1.0, PI / 4.0)] {
        let Some(p) = ops.iter().find(|p| p.label == label) else { continue };
        let f = funcat::make_exp_power(g, C64::new(1.0, 0.0))?;
        let r = fcalc::h_calc_arccot(&f, &p.op, psi, cfg)?;
        let direct = expm(&p.op.frac_power(g)?, 1.0);
        let inputs = kv(&[("matrix", label.into()), ("f", f.key().into()), ("psi", fmt17(psi))]);
        rep.checks.extend(audit("arccot calculus bound", &r, inputs.clone()));
        rep.checks.push(BoundCheck::new("arccot calculus matches expm", r.result.sub(&direct).norm2(), 1e-6, inputs));
    }
    Ok(())
}

fn run_shift(rep: &mut SuiteReport, cfg: &QuadConfig) -> Result<(), Error> {
    let cases: [(&str, f64); 3] = [("resolvent:1", 1.0), ("arccot", 0.0), ("exp", 1.0)];
    let taus: [(C64, f64); 5] = [
        (C64::new(0.0, 0.0), PI / 4.0),
        (C64::new(1.0, 0.0), PI / 4.0),
        (C64::new(1.0, 1.0), PI / 3.0),
        (C64::from_polar(3.0, -PI / 6.0), PI / 4.0),
        (C64::from_polar(0.2, 0.4 * PI), 0.45 * PI),
    ];
    let mut hsg = Table::new("hardy-shift-ratio", &["case", "tau_re", "tau_im", "ratio"]);
    for (case, (key, s)) in cases.iter().enumerate() {
        let f = funcat::from_key(key)?;
        for (tau, psi) in taus {
            rep.checks.extend(check_shift_semigroup(&f, *s, psi, &[tau], cfg)?);
        }
        // observational: the Hardy-space shift norm against 2K with K = 3.7
        let psi = PI / 3.0;
        let base = normcalc::hpsi_norm(&f, psi, cfg)?;
        for (tau, _) in taus.iter().filter(|(t, _)| t.norm() == 0.0 || t.arg().abs() < psi) {
            let g = funcat::shift(&f, *tau);
            let v = normcalc::hpsi_norm(&g, psi, cfg)?;
            hsg.rows.push(vec![case as f64, tau.re, tau.im, v.value / base.value]);
        }
    }
    rep.tables.push(hsg);
    rep.notes.push("case 0 = resolvent:1 in D_1, case 1 = arccot in D_0, case 2 = exp(-z) in D_1".into());
    rep.notes.push("hardy-shift-ratio is observational; the reference level is 2K = 7.4".into());
    Ok(())
}

/// Run every suite on the fixed test matrices with default parameters.
pub fn run_all(seed: u64, cfg: &QuadConfig) -> Result<Vec<SuiteReport>, Error> {
    let mats = matops::test_matrices();
    let params = SuiteParams::default();
    Suite::ALL.iter().map(|s| run_suite(*s, &mats, &params, seed, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_check_margin_and_tolerance() {
        let c = BoundCheck::new("x", 1.0 + 1e-10, 1.0, vec![]);
        assert!(c.passed);
        assert!((c.margin + 1e-10).abs() < 1e-15);
        assert!(!BoundCheck::new("x", 1.0 + 1e-8, 1.0, vec![]).passed);
    }

    #[test]
    fn fmt17_has_seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }

    #[test]
    fn pole_sequence_is_nested_and_in_right_half_plane() {
        let a = pole_sequence(8);
        let b = pole_sequence(16);
        assert_eq!(&b[..8], &a[..]);
        assert!(b.iter().all(|p| p.re > 0.0));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()).unwrap(), s);
        }
        assert!(Suite::from_name("nope").is_err());
    }
}
