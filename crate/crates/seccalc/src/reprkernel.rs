// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Reproducing formulas.
//!
//! * [`q_apply`] evaluates the area integral operator
//!   `Q_s g(z) = -(2^s/π) ∬_{ℂ₊} α^s g(α+iβ) (z+α-iβ)^{-(s+1)} dβ dα`,
//!   so that `f = f(∞) + Q_s f'` for `f ∈ 𝒟ₛ` ([`reproduce_ds`]).
//! * [`reproduce_hpsi`] lifts a function on `Σ_ψ` to the half-plane through
//!   `z ↦ z^γ`, `γ = 2ψ/π`, and applies `Q_0` there.
//! * [`reproduce_arccot`] is the line-integral form with kernel
//!   `arccot((z/t)^ν)`, `ν = π/(2ψ)`.

use crate::funcat::{self, SectorFn};
use crate::normcalc::{self, Hints, QuadConfig, Rotation};
use crate::quad::{self, Exec, LineOpts};
use crate::Error;
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};

/// A complex integral with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: C64,
    pub est_abs_err: f64,
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    Qs,
    RepA1,
    ArccotForm,
}

impl Formula {
    pub fn tag(self) -> &'static str {
        match self {
            Formula::Qs => "qs",
            Formula::RepA1 => "repa1",
            Formula::ArccotForm => "arccot",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReproReport {
    pub point: C64,
    pub reproduced: C64,
    pub reference: C64,
    pub abs_err: f64,
    /// Quadrature error estimate of the reproducing integral.
    pub est_quad_err: f64,
    pub nodes: usize,
    pub formula: Formula,
}

impl ReproReport {
    fn new(point: C64, reproduced: C64, reference: C64, q: Integral, formula: Formula) -> Self {
        ReproReport {
            point,
            reproduced,
            reference,
            abs_err: (reproduced - reference).norm(),
            est_quad_err: q.est_abs_err,
            nodes: q.nodes,
            formula,
        }
    }
}

fn is_zero(f: &SectorFn) -> bool {
    f.key().starts_with("const:re=0,im=0")
}

/// `(Q_s g)(z)` for `z ∈ ℂ₊ ∪ {0}`.
pub fn q_apply(g: &SectorFn, s: f64, z: C64, cfg: &QuadConfig) -> Result<Integral, Error> {
    if s.is_nan() || s <= -1.0 {
        return Err(Error::Domain(format!("weight exponent must exceed -1, got {s}")));
    }
    if !(z.re > 0.0 || z == C64::new(0.0, 0.0)) || !z.is_finite() {
        return Err(Error::Domain(format!("Q_s is evaluated on the open right half-plane or at 0, got {z}")));
    }
    if is_zero(g) {
        return Ok(Integral {
            value: C64::new(0.0, 0.0),
            est_abs_err: 0.0,
            nodes: 0,
        });
    }
    let p = s + 1.0;
    let int_p = (p.fract() == 0.0 && p < 16.0).then_some(p as i32);
    // α^s |ζ| (z+ζ̄)^{-(s+1)} / cos^s φ = (z/ρ + e^{-iφ})^{-(s+1)} with ζ = ρe^{iφ}
    let k = |rho: C64, dir: C64, jac: C64| -> C64 {
        let w = z / rho + dir.conj();
        let kern = match int_p {
            Some(n) => w.powi(-n),
            None => w.powf(-p),
        };
        g.eval(dir * rho) * kern * jac
    };
    let hints = Hints::of(g).with_point(-z.conj());
    let rot = Rotation::from_points(&[z]);
    let r = normcalc::polar_integral_holo(&k, s, &hints, rot, cfg);
    if r.divergent || !r.value.is_finite() {
        return Err(Error::Divergent(format!(
            "Q_s integral of {} at s = {s} does not converge: {}",
            g.key(),
            r.diagnostic.unwrap_or_default()
        )));
    }
    let c = -(2f64.powf(s)) / PI;
    Ok(Integral {
        value: r.value * c,
        est_abs_err: r.err * c.abs(),
        nodes: r.nodes,
    })
}

/// `f(∞) + (Q_s f')(z)` against `f(z)`.
pub fn reproduce_ds(f: &SectorFn, s: f64, z: C64, cfg: &QuadConfig) -> Result<ReproReport, Error> {
    let at_inf = normcalc::limit_at_inf(f, cfg)?;
    let q = q_apply(&f.derivative(), s, z, cfg)?;
    Ok(ReproReport::new(z, at_inf + q.value, f.value_or_limit(z), q, Formula::Qs))
}

fn check_psi(f: &SectorFn, psi: f64) -> Result<(), Error> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::Domain(format!("sector half-angle must lie in (0, pi), got {psi}")));
    }
    if psi > f.holo_angle + 1e-12 {
        return Err(Error::Domain(format!(
            "{} is holomorphic only on the sector of half-angle {:.6}",
            f.key(),
            f.holo_angle
        )));
    }
    Ok(())
}

fn check_point(z: C64, psi: f64) -> Result<(), Error> {
    if z != C64::new(0.0, 0.0) && z.arg().abs() >= psi {
        return Err(Error::Domain(format!("point {z} lies outside the sector of half-angle {psi:.6}")));
    }
    Ok(())
}

/// Half-plane lift: `f(∞) - (1/π) ∬ f_γ'(α+iβ) (z^{1/γ}+α-iβ)^{-1} dβ dα` with
/// `f_γ(z) = f(z^γ)`, `γ = 2ψ/π`.
pub fn reproduce_hpsi(f: &SectorFn, psi: f64, z: C64, cfg: &QuadConfig) -> Result<ReproReport, Error> {
    check_psi(f, psi)?;
    check_point(z, psi)?;
    let gamma = 2.0 * psi / PI;
    let at_inf = normcalc::limit_at_inf(f, cfg)?;
    let lifted = funcat::power_compose(f, gamma);
    let w = if z == C64::new(0.0, 0.0) { z } else { z.powf(1.0 / gamma) };
    let q = q_apply(&lifted.derivative(), 0.0, w, cfg)?;
    Ok(ReproReport::new(z, at_inf + q.value, f.value_or_limit(z), q, Formula::RepA1))
}

/// `f_ψ'(t) = (e^{iψ} f'(te^{iψ}) + e^{-iψ} f'(te^{-iψ}))/2`.
pub fn boundary_derivative(f: &SectorFn, psi: f64, t: f64) -> C64 {
    let e = C64::from_polar(1.0, psi);
    (e * f.deriv(e * t) + e.conj() * f.deriv(e.conj() * t)) * 0.5
}

/// Principal `arccot` of a complex argument off `[-i, i]`.
pub fn arccot(w: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    if w.norm() > 1e8 {
        // arccot w = 1/w - 1/(3w³) + …
        let r = w.inv();
        return r - r * r * r / 3.0;
    }
    ((w + i) / (w - i)).ln() / (2.0 * i)
}

/// `f(∞) - (2/π) ∫₀^∞ f_ψ'(t) arccot((z/t)^ν) dt`, `ν = π/(2ψ)`.
pub fn reproduce_arccot(f: &SectorFn, psi: f64, z: C64, cfg: &QuadConfig) -> Result<ReproReport, Error> {
    check_psi(f, psi)?;
    check_point(z, psi)?;
    let at_inf = normcalc::limit_at_inf(f, cfg)?;
    for sign in [1.0, -1.0] {
        let dir = C64::from_polar(1.0, sign * psi);
        if f.poles.iter().any(|p| (p * dir.conj()).im.abs() < 1e-12 && (p * dir.conj()).re > 0.0) {
            return Err(Error::Domain(format!(
                "derivative of {} is singular on the boundary ray arg z = {:.6}",
                f.key(),
                sign * psi
            )));
        }
    }
    if is_zero(&f.derivative()) || f.key().starts_with("const:") {
        let q = Integral {
            value: C64::new(0.0, 0.0),
            est_abs_err: 0.0,
            nodes: 0,
        };
        return Ok(ReproReport::new(z, at_inf, f.value_or_limit(z), q, Formula::ArccotForm));
    }
    let nu = PI / (2.0 * psi);
    let zn = if z == C64::new(0.0, 0.0) { z } else { z.powf(nu) };
    let k = |x: C64| -> C64 {
        let t = x.re;
        let kern = if zn == C64::new(0.0, 0.0) { C64::new(FRAC_PI_2, 0.0) } else { arccot(zn / t.powf(nu)) };
        boundary_derivative(f, psi, t) * kern
    };
    let mut hints = Hints::of(f);
    hints.points = f
        .poles
        .iter()
        .flat_map(|p| [p * C64::from_polar(1.0, -psi), p * C64::from_polar(1.0, psi)])
        .collect();
    if z.norm() > 0.0 {
        hints.scales.push(z.norm());
    }
    let r = normcalc::radial_integral(&k, C64::new(1.0, 0.0), &hints, cfg, cfg.abs_tol, cfg.rel_tol, Exec::Serial);
    if r.divergent || !r.value.is_finite() {
        return Err(Error::Divergent(format!("boundary derivative of {} is not integrable", f.key())));
    }
    let q = Integral {
        value: r.value * (-2.0 / PI),
        est_abs_err: r.err * 2.0 / PI,
        nodes: r.nodes,
    };
    Ok(ReproReport::new(z, at_inf + q.value, f.value_or_limit(z), q, Formula::ArccotForm))
}

/// `ln |(1+x)/(1-x)|` for `x = t^ν`, given `y = t^ν - 1` exactly.
pub fn log_kernel(y: f64) -> f64 {
    if y > 1.0 {
        (2.0 / y).ln_1p()
    } else {
        (2.0 + y).ln() - y.abs().ln()
    }
}

/// `t^ν - 1` from `δ = t - 1` without cancellation.
pub fn pow_minus_one(delta: f64, nu: f64) -> f64 {
    (nu * delta.ln_1p()).exp_m1()
}

/// `ln|(1+t^ν)/(1-t^ν)|` given `t` and `δ = t - 1`; `δ` is only trusted near
/// `t = 1`, elsewhere `2 artanh(min(x, 1/x))` keeps full relative accuracy.
pub fn kernel_at(t: f64, delta: f64, nu: f64) -> f64 {
    if delta.abs() < 0.5 {
        return log_kernel(pow_minus_one(delta, nu));
    }
    let x = t.powf(nu);
    2.0 * if x < 1.0 { x.atanh() } else { x.recip().atanh() }
}

/// `∫_{e^L}^∞ ln|(1+t^ν)/(1-t^ν)| dt/t` from `ln((x+1)/(x-1)) = 2 Σ x^{-(2k+1)}/(2k+1)`.
pub fn kernel_tail(nu: f64, cut: f64) -> f64 {
    let mut sum = 0.0;
    for k in 0..64 {
        let m = (2 * k + 1) as f64;
        let term = 2.0 * (-m * nu * cut).exp() / (m * m * nu);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `(1/2π) ∫₀^∞ ln|(1+t^ν)/(1-t^ν)| dt/t` with `ν = π/(2ψ)`; equals `ψ/2`.
pub fn arccot_kernel_identity(psi: f64, cfg: &QuadConfig) -> Result<Integral, Error> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::Domain(format!("sector half-angle must lie in (0, pi), got {psi}")));
    }
    let nu = PI / (2.0 * psi);
    let f = |t: f64, d: f64| kernel_at(t, d, nu) / t;
    let r = quad::positive_axis(&f, 1.0, cfg.log_radius_cut, cfg.abs_tol, cfg.rel_tol, Exec::Serial);
    if r.divergent {
        return Err(Error::Divergent("kernel integral does not converge".into()));
    }
    // both ends beyond e^{±cut} contribute the same amount
    let ends = 2.0 * kernel_tail(nu, cfg.log_radius_cut);
    let c = 1.0 / (2.0 * PI);
    Ok(Integral {
        value: C64::new((r.value + ends) * c, 0.0),
        est_abs_err: r.err * c,
        nodes: r.nodes,
    })
}

/// Samples of `|z g(z)|` along a ray, for the decay property of derivatives.
#[derive(Clone, Debug)]
pub struct DecayCurve {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Non-increasing samples that end below 1% of the first non-zero one
    /// (or all zero).
    pub decays: bool,
}

/// `|z g(z)|` on `arg z = ψ/2` for `|z| ∈ {10, 10², 10³, 10⁴}`; only `k = 1`
/// is supported.
pub fn decay_probe(g: &SectorFn, k: u32, psi: f64) -> Result<DecayCurve, Error> {
    if k != 1 {
        return Err(Error::Unsupported(format!("decay probe supports k = 1 only, got {k}")));
    }
    let dir = C64::from_polar(1.0, psi / 2.0);
    let radii = vec![1e1, 1e2, 1e3, 1e4];
    let values: Vec<f64> = radii.iter().map(|&r| (dir * r * g.eval(dir * r)).norm()).collect();
    let monotone = values.windows(2).all(|w| w[1] <= w[0]);
    let first = values.iter().copied().find(|v| *v > 0.0);
    let decays = match first {
        None => true,
        Some(f0) => monotone && values[values.len() - 1] <= 1e-2 * f0,
    };
    Ok(DecayCurve { radii, values, decays })
}

/// The upper bound `2^s ‖g‖_{𝒱ₛ} / (π cos^{s+1} ψ)` for `|Q_s g|` on `Σ_ψ`.
pub fn q_sector_bound(vs_norm: f64, s: f64, psi: f64) -> f64 {
    2f64.powf(s) * vs_norm / (PI * psi.cos().powf(s + 1.0))
}

/// Integrate a function of `t ∈ (0, ∞)` by dyadic panels in `ln t`.
pub fn log_line(f: &(dyn Fn(f64) -> C64 + Sync), cfg: &QuadConfig) -> Integral {
    let g = |u: f64| {
        let t = u.exp();
        f(t) * t
    };
    let r = quad::line(&g, &LineOpts::log_radial(cfg.log_radius_cut, cfg.abs_tol, cfg.rel_tol));
    Integral {
        value: r.value,
        est_abs_err: r.err,
        nodes: r.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcat::{constant, make_arccot, resolvent};

    #[test]
    fn kernel_identity_at_right_angle() {
        let r = arccot_kernel_identity(FRAC_PI_2, &QuadConfig::default()).unwrap();
        assert!((r.value.re - PI / 4.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn constants_reproduce_exactly() {
        let c = constant(C64::new(2.0, -1.0));
        let cfg = QuadConfig::default();
        let z = C64::new(1.0, 0.5);
        assert_eq!(reproduce_ds(&c, 1.0, z, &cfg).unwrap().abs_err, 0.0);
        assert_eq!(reproduce_arccot(&c, 1.0, z, &cfg).unwrap().abs_err, 0.0);
    }

    #[test]
    fn resolvent_reproduces_at_one() {
        let r1 = resolvent(1.0.into()).unwrap();
        let q = q_apply(&r1.derivative(), 0.0, C64::new(1.0, 0.0), &QuadConfig::default()).unwrap();
        assert!((q.value - 0.5).norm() < 1e-8, "{q:?}");
    }

    #[test]
    fn arccot_boundary_derivative_is_singular_at_right_angle() {
        let a = make_arccot();
        let err = reproduce_arccot(&a, FRAC_PI_2 - 1e-15, C64::new(1.0, 0.0), &QuadConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn arccot_large_argument_series_matches_log_form() {
        let w = C64::new(3e7, 1e7);
        let i = C64::new(0.0, 1.0);
        let direct = ((w + i) / (w - i)).ln() / (2.0 * i);
        assert!((arccot(w) - direct).norm() < 1e-15);
    }
}
