// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Operator functional calculi for matrices.
//!
//! * [`d_calc`]: `f(∞)I - (2^s/π) ∬ α^s f'(α+iβ) (A+α-iβ)^{-(s+1)} dβ dα`.
//! * [`h_calc_lift`]: the same area integral with `s = 0` applied to
//!   `f(z^{1/γ})` and `A^γ`, `γ = π/(2ψ)`.
//! * [`h_calc_arccot`]: `f(∞)I - (2/π) ∫₀^∞ f_ψ'(t) arccot((A/t)^γ) dt` with
//!   the operator kernel from [`arccot_int`].
//! * [`hp_calc`]: `∫ e^{-tA} dμ(t)` for Laplace transforms of measures.
//!
//! All area integrals are evaluated on the triangular Schur factor of `A`, one
//! triangular solve per node, and mapped back at the end. Every calculus call
//! checks its a priori norm bound and fails if the computed matrix violates
//! it.

use crate::funcat::SectorFn;
use crate::matops::{self, tri_powi, tri_shifted_inverse, CMatrix, SectorialOp, M_SAFETY};
use crate::normcalc::{self, Hints, QuadConfig, Rotation};
use crate::quad::{self, Exec, LineOpts, Tol};
use crate::reprkernel::{boundary_derivative, kernel_at, kernel_tail};
use crate::Error;
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dcalc,
    HcalcLift,
    HcalcArccot,
    Hp,
    ArccotInt,
    Oracle,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Dcalc => "d",
            Method::HcalcLift => "h-lift",
            Method::HcalcArccot => "h-arccot",
            Method::Hp => "hp",
            Method::ArccotInt => "arccot-int",
            Method::Oracle => "oracle",
        }
    }
}

/// A norm bound `lhs ≤ rhs` checked by a calculus call.
#[derive(Clone, Copy, Debug)]
pub struct NormBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl NormBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-9)
    }
}

#[derive(Clone, Debug)]
pub struct CalcReport {
    pub result: CMatrix,
    pub method: Method,
    pub s_or_psi: f64,
    pub quad_nodes: usize,
    pub est_abs_err: f64,
    /// `‖result - oracle‖` when the eigendecomposition oracle applies.
    pub oracle_diff: Option<f64>,
    /// The a priori bound, when the constants involved could be computed.
    pub bound: Option<NormBound>,
}

fn constant_value(f: &SectorFn) -> Option<C64> {
    let k = f.key();
    if k.starts_with("const:") {
        return Some(f.eval(C64::new(1.0, 0.0)));
    }
    None
}

fn finish(
    f: &SectorFn,
    op: &SectorialOp,
    result: CMatrix,
    method: Method,
    s_or_psi: f64,
    nodes: usize,
    err: f64,
    bound: Option<NormBound>,
) -> Result<CalcReport, Error> {
    if let Some(b) = bound {
        if !b.holds() {
            return Err(Error::Precondition(format!(
                "{} calculus for {} violates its norm bound: {:.17e} > {:.17e}",
                method.tag(),
                f.key(),
                b.lhs,
                b.rhs
            )));
        }
    }
    let oracle_diff = matops::eig_calc_oracle(op, f).ok().map(|o| o.sub(&result).norm2());
    Ok(CalcReport {
        result,
        method,
        s_or_psi,
        quad_nodes: nodes,
        est_abs_err: err,
        oracle_diff,
        bound,
    })
}

/// `∬ α^s g(ζ) (T + ζ̄)^{-(s+1)}` on the Schur factor, packed, without the
/// `-2^s/π` prefactor.
fn area_integral(g: &SectorFn, op: &SectorialOp, s: f64, cfg: &QuadConfig) -> Result<(Vec<C64>, f64, usize), Error> {
    let n = op.n();
    let p = s + 1.0;
    let int_p = (p.fract() == 0.0 && p <= 16.0).then_some(p as u32);
    if int_p.is_none() && !op.is_diagonalizable() {
        return Err(Error::Unsupported(format!(
            "non-integer s = {s} needs a diagonalizable matrix (eigenbasis condition {:.3e})",
            op.eig_condition
        )));
    }
    let zero = vec![C64::new(0.0, 0.0); n * (n + 1) / 2];
    // α^s |ζ| (A+ζ̄)^{-(s+1)} / cos^s φ = (A/ρ + e^{-iφ})^{-(s+1)}
    let k = |rho: C64, dir: C64, jac: C64| -> Vec<C64> {
        let gv = g.eval(dir * rho) * jac;
        if gv == C64::new(0.0, 0.0) || !gv.is_finite() {
            return if gv.is_finite() { zero.clone() } else { vec![gv; zero.len()] };
        }
        let b = dir.conj();
        let mut m = match int_p {
            Some(1) => tri_shifted_inverse(&op.t, rho.inv(), b),
            Some(q) => tri_powi(n, &tri_shifted_inverse(&op.t, rho.inv(), b), q),
            None => match op.tri_function(&|l| (l / rho + b).powf(-p)) {
                Ok(v) => v,
                Err(_) => vec![C64::new(f64::NAN, 0.0); zero.len()],
            },
        };
        m.iter_mut().for_each(|x| *x *= gv);
        m
    };
    let mut hints = Hints::of(g);
    for l in &op.eigvals {
        hints = hints.with_point(-l.conj());
    }
    let rot = Rotation::from_points(&op.eigvals);
    let r = normcalc::polar_integral_holo(&k, s, &hints, rot, cfg);
    if r.divergent || r.value.iter().any(|z| !z.is_finite()) {
        return Err(Error::Divergent(format!(
            "area integral of {} at s = {s} does not converge: {}",
            g.key(),
            r.diagnostic.unwrap_or_default()
        )));
    }
    Ok((r.value, r.err, r.nodes))
}

fn check_s(s: f64) -> Result<(), Error> {
    if s.is_nan() || s <= -1.0 {
        return Err(Error::Domain(format!("weight exponent must exceed -1, got {s}")));
    }
    Ok(())
}

/// `f(∞)I + Q_s f'(A)` without the bound check.
fn d_core(f: &SectorFn, op: &SectorialOp, s: f64, cfg: &QuadConfig) -> Result<(CMatrix, f64, usize), Error> {
    let n = op.n();
    if let Some(c) = constant_value(f) {
        return Ok((CMatrix::identity(n).scale(c), 0.0, 0));
    }
    let at_inf = normcalc::limit_at_inf(f, cfg)?;
    let (packed, err, nodes) = area_integral(&f.derivative(), op, s, cfg)?;
    let c = -(2f64.powf(s)) / PI;
    let q = op.from_packed(&packed).scale(C64::new(c, 0.0));
    Ok((q.shift(at_inf), err * c.abs(), nodes))
}

/// `f_{𝒟ₛ}(A)`.
pub fn d_calc(f: &SectorFn, op: &SectorialOp, s: f64, cfg: &QuadConfig) -> Result<CalcReport, Error> {
    check_s(s)?;
    if op.theta_est >= FRAC_PI_2 {
        return Err(Error::Precondition(format!(
            "spectral angle {:.6} is not below pi/2",
            op.theta_est
        )));
    }
    let (result, err, nodes) = d_core(f, op, s, cfg)?;
    let bound = if constant_value(f).is_some() {
        None
    } else {
        let vs = normcalc::vs_norm(&f.derivative(), s, cfg)?;
        if vs.divergent {
            return Err(Error::Divergent(format!("{} is not in D_s for s = {s}", f.key())));
        }
        op.m_upper(FRAC_PI_2).ok().map(|m| NormBound {
            lhs: result.norm2(),
            rhs: normcalc::limit_at_inf(f, cfg).map(|l| l.norm()).unwrap_or(0.0)
                + 2f64.powf(s) / PI * m.powi((s + 1.0).ceil() as i32) * vs.value,
        })
    };
    finish(f, op, result, Method::Dcalc, s, nodes, err, bound)
}

/// `f_{𝒟ₛ}(A + εI)`.
pub fn shifted_calc(f: &SectorFn, op: &SectorialOp, s: f64, eps: f64, cfg: &QuadConfig) -> Result<CalcReport, Error> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("shift must be positive, got {eps}")));
    }
    d_calc(f, &op.shifted(C64::new(eps, 0.0)), s, cfg)
}

fn check_h(f: &SectorFn, op: &SectorialOp, psi: f64) -> Result<(), Error> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::Domain(format!("sector half-angle must lie in (0, pi), got {psi}")));
    }
    if psi <= op.theta_est {
        return Err(Error::Precondition(format!(
            "sector half-angle {psi:.6} does not exceed the spectral angle {:.6}",
            op.theta_est
        )));
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

fn h1_bound_norm(f: &SectorFn, psi: f64, cfg: &QuadConfig) -> Option<f64> {
    normcalc::h1_sector_norm(&f.derivative(), psi, cfg)
        .ok()
        .filter(|r| !r.divergent)
        .map(|r| r.value)
}

/// `f_ℋ(A)` through the half-plane lift.
pub fn h_calc_lift(f: &SectorFn, op: &SectorialOp, psi: f64, cfg: &QuadConfig) -> Result<CalcReport, Error> {
    check_h(f, op, psi)?;
    if let Some(c) = constant_value(f) {
        let r = CMatrix::identity(op.n()).scale(c);
        return finish(f, op, r, Method::HcalcLift, psi, 0, 0.0, None);
    }
    let gamma = PI / (2.0 * psi);
    let b = op.power_op(gamma)?;
    let lifted = crate::funcat::power_compose(f, 1.0 / gamma);
    // in ln|w| the lifted function decays γ times slower than f in ln|z|
    let mut wide = cfg.clone();
    wide.log_radius_cut = (cfg.log_radius_cut * gamma.max(1.0)).min(700.0);
    let (result, err, nodes) = d_core(&lifted, &b, 0.0, &wide)?;
    let bound = match (b.m_upper(FRAC_PI_2), h1_bound_norm(f, psi, cfg)) {
        (Ok(m), Some(h)) => Some(NormBound {
            lhs: result.norm2(),
            rhs: normcalc::limit_at_inf(f, cfg)?.norm() + m * h,
        }),
        _ => None,
    };
    finish(f, op, result, Method::HcalcLift, psi, nodes, err, bound)
}

/// `arccot((A/τ)^γ)` on the Schur factor, packed.
fn arccot_int_tri(op: &SectorialOp, psi: f64, tau: f64, abs: f64, rel: f64, cut: f64) -> (Vec<C64>, f64, usize, bool) {
    let n = op.n();
    let gamma = PI / (2.0 * psi);
    let e = C64::from_polar(1.0, psi);
    let inv_tau = 1.0 / tau;
    // (1/4π) ∫₀^∞ ln|(1+t^γ)/(1-t^γ)| ((t - e^{iψ}B)^{-1} + (t - e^{-iψ}B)^{-1}) dt
    let ray = |t: f64, d: f64| -> Vec<C64> {
        let w = kernel_at(t, d, gamma);
        let mut x = tri_shifted_inverse(&op.t, -e * inv_tau, C64::new(t, 0.0));
        let y = tri_shifted_inverse(&op.t, -e.conj() * inv_tau, C64::new(t, 0.0));
        for (a, b) in x.iter_mut().zip(&y) {
            *a = (*a + b) * w;
        }
        x
    };
    let r = quad::positive_axis(&ray, 1.0, cut, abs, rel, Exec::Serial);
    // beyond t = e^{cut} both resolvents are 1/t + O(t^{-2})
    let tail = 2.0 * kernel_tail(gamma, cut);
    // (1/4i) ∫ (λ - B)^{-1} dλ over the arc, λ = e^{iη}
    let arc = |eta: f64| -> Vec<C64> {
        let l = C64::from_polar(1.0, eta);
        let mut x = tri_shifted_inverse(&op.t, C64::new(-inv_tau, 0.0), l);
        x.iter_mut().for_each(|z| *z *= l);
        x
    };
    let a = quad::adaptive(&arc, psi, 2.0 * PI - psi, &[PI], Tol::new(abs, rel), Exec::Serial);
    let mut out = vec![C64::new(0.0, 0.0); n * (n + 1) / 2];
    for (o, (x, y)) in out.iter_mut().zip(r.value.iter().zip(&a.value)) {
        *o = x / (4.0 * PI) + y / 4.0;
    }
    for i in 0..n {
        out[i * n - i * (i + 1) / 2 + i] += tail / (4.0 * PI);
    }
    (out, r.err / (4.0 * PI) + a.err / 4.0, r.nodes + a.nodes, r.divergent)
}

/// `arccot((A/τ)^γ)`, `γ = π/(2ψ)`, by the ray-plus-arc resolvent integral.
pub fn arccot_int(op: &SectorialOp, psi: f64, t_scale: f64, cfg: &QuadConfig) -> Result<CalcReport, Error> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::Domain(format!("sector half-angle must lie in (0, pi), got {psi}")));
    }
    if psi <= op.theta_est {
        return Err(Error::Precondition(format!(
            "sector half-angle {psi:.6} does not exceed the spectral angle {:.6}",
            op.theta_est
        )));
    }
    if !(t_scale > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {t_scale}")));
    }
    let (packed, err, nodes, bad) = arccot_int_tri(op, psi, t_scale, cfg.abs_tol, cfg.rel_tol, cfg.log_radius_cut);
    if bad {
        return Err(Error::Quadrature("ray integral of the arccot kernel diverges".into()));
    }
    let result = op.from_packed(&packed);
    let bound = op.m_upper(psi).ok().map(|m| NormBound {
        lhs: result.norm2(),
        rhs: FRAC_PI_2 * m,
    });
    if let Some(b) = bound {
        if !b.holds() {
            return Err(Error::Precondition(format!(
                "arccot kernel violates its norm bound: {:.17e} > {:.17e}",
                b.lhs, b.rhs
            )));
        }
    }
    let gamma = PI / (2.0 * psi);
    let oracle_diff = op
        .eig_function(&|l| crate::reprkernel::arccot((l / t_scale).powf(gamma)))
        .ok()
        .map(|o| o.sub(&result).norm2());
    Ok(CalcReport {
        result,
        method: Method::ArccotInt,
        s_or_psi: psi,
        quad_nodes: nodes,
        est_abs_err: err,
        oracle_diff,
        bound,
    })
}

/// `f_ℋ(A)` through the arccot line integral.
pub fn h_calc_arccot(f: &SectorFn, op: &SectorialOp, psi: f64, cfg: &QuadConfig) -> Result<CalcReport, Error> {
    check_h(f, op, psi)?;
    let n = op.n();
    if let Some(c) = constant_value(f) {
        let r = CMatrix::identity(n).scale(c);
        return finish(f, op, r, Method::HcalcArccot, psi, 0, 0.0, None);
    }
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
    let at_inf = normcalc::limit_at_inf(f, cfg)?;
    let inner_abs = cfg.abs_tol * 1e-2;
    let inner_rel = (cfg.rel_tol * 1e-2).max(1e-14);
    let failed = std::sync::atomic::AtomicBool::new(false);
    let inner_nodes = std::sync::atomic::AtomicUsize::new(0);
    let zero = vec![C64::new(0.0, 0.0); n * (n + 1) / 2];
    let g = |u: f64| -> Vec<C64> {
        let t = u.exp();
        let d = boundary_derivative(f, psi, t) * t;
        if d == C64::new(0.0, 0.0) {
            return zero.clone();
        }
        let (mut k, _, nodes, bad) = arccot_int_tri(op, psi, t, inner_abs, inner_rel, cfg.log_radius_cut);
        inner_nodes.fetch_add(nodes, std::sync::atomic::Ordering::Relaxed);
        if bad {
            failed.store(true, std::sync::atomic::Ordering::Relaxed);
        }
        k.iter_mut().for_each(|x| *x *= d);
        k
    };
    let mut opts = LineOpts::log_radial(cfg.log_radius_cut, cfg.abs_tol, cfg.rel_tol);
    let mut breaks: Vec<f64> = op.eigvals.iter().filter(|l| l.norm() > 0.0).map(|l| l.norm().ln()).collect();
    breaks.extend(f.scales.iter().filter(|r| **r > 0.0).map(|r| r.ln()));
    for p in &f.poles {
        for sign in [1.0, -1.0] {
            let t = (p * C64::from_polar(1.0, -sign * psi)).re;
            if t > 0.0 {
                breaks.push(t.ln());
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    opts.centre = if breaks.is_empty() { 0.0 } else { breaks.iter().sum::<f64>() / breaks.len() as f64 };
    opts.breaks = breaks;
    opts.max_pieces = cfg.max_panels;
    opts.exec = if cfg.parallel { Exec::Parallel } else { Exec::Serial };
    let r = quad::line(&g, &opts);
    let inner_failed = failed.into_inner();
    if r.divergent || inner_failed || r.value.iter().any(|z| !z.is_finite()) {
        let why = if inner_failed { "operator kernel integral" } else { "outer line integral" };
        return Err(Error::Divergent(format!("arccot formula for {}: {why} does not converge", f.key())));
    }
    let c = -2.0 / PI;
    let result = op.from_packed(&r.value).scale(C64::new(c, 0.0)).shift(at_inf);
    let bound = match (op.m_upper(psi), h1_bound_norm(f, psi, cfg)) {
        (Ok(m), Some(h)) => Some(NormBound {
            lhs: result.norm2(),
            rhs: at_inf.norm() + m / 2.0 * h,
        }),
        _ => None,
    };
    let nodes = r.nodes + inner_nodes.into_inner();
    finish(f, op, result, Method::HcalcArccot, psi, nodes, r.err * c.abs(), bound)
}

/// `∫ e^{-tA} dμ(t)` for `f = ℒμ`.
pub fn hp_calc(f: &SectorFn, op: &SectorialOp, cfg: &QuadConfig) -> Result<CalcReport, Error> {
    let lap = f
        .laplace
        .as_ref()
        .ok_or_else(|| Error::Unsupported(format!("{} has no Laplace representation", f.key())))?;
    let n = op.n();
    let mut result = CMatrix::zeros(n);
    for (m, t) in &lap.atoms {
        result.axpy_c(*m, &matops::expm(&op.t, *t));
    }
    let mut nodes = 0;
    let mut err = 0.0;
    if let Some(d) = &lap.density {
        let g = |u: f64| -> CMatrix {
            let t = u.exp();
            let w = d(t) * t;
            if w == C64::new(0.0, 0.0) {
                return CMatrix::zeros(n);
            }
            matops::expm(&op.t, t).scale(w)
        };
        let mut opts = LineOpts::log_radial(cfg.log_radius_cut, cfg.abs_tol, cfg.rel_tol);
        let rho = op.spectral_radius();
        opts.centre = if rho > 0.0 { -rho.ln() } else { 0.0 };
        opts.breaks = op.eigvals.iter().filter(|l| l.re > 0.0).map(|l| -l.re.ln()).collect();
        opts.breaks.sort_by(f64::total_cmp);
        opts.max_pieces = cfg.max_panels;
        opts.exec = if cfg.parallel { Exec::Parallel } else { Exec::Serial };
        let r = quad::line(&g, &opts);
        if r.divergent {
            return Err(Error::Divergent(format!("Laplace integral of {} does not converge", f.key())));
        }
        result = result.add(&r.value);
        nodes = r.nodes;
        err = r.err;
    }
    let result = op.from_schur_basis(&result);
    finish(f, op, result, Method::Hp, 0.0, nodes, err, None)
}

/// `f(A)` by the eigendecomposition oracle, as a report.
pub fn oracle_calc(f: &SectorFn, op: &SectorialOp) -> Result<CalcReport, Error> {
    let result = matops::eig_calc_oracle(op, f)?;
    Ok(CalcReport {
        result,
        method: Method::Oracle,
        s_or_psi: 0.0,
        quad_nodes: 0,
        est_abs_err: 0.0,
        oracle_diff: Some(0.0),
        bound: None,
    })
}

/// Multiset distance between two spectra: the largest distance in an optimal
/// greedy matching (exact for the small, well separated spectra used here).
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `(2^s/π) M_A^{⌈s+1⌉}` with the safety factor on `M_A`.
pub fn d_bound_constant(op: &SectorialOp, s: f64) -> Result<f64, Error> {
    let m = M_SAFETY * op.sector_constant(FRAC_PI_2)?;
    Ok(2f64.powf(s) / PI * m.powi((s + 1.0).ceil() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcat;

    fn cfg() -> QuadConfig {
        let mut c = QuadConfig::with_tol(1e-8, 1e-8);
        c.parallel = false;
        c
    }

    #[test]
    fn constant_maps_to_multiple_of_identity() {
        let op = SectorialOp::new(CMatrix::from_real_diag(&[1.0, 2.0])).unwrap();
        let f = funcat::constant(C64::new(3.0, -1.0));
        let r = d_calc(&f, &op, 1.0, &cfg()).unwrap();
        assert_eq!(r.result, CMatrix::identity(2).scale(C64::new(3.0, -1.0)));
    }

    #[test]
    fn arccot_kernel_scalar() {
        let op = SectorialOp::new(CMatrix::from_real_diag(&[1.0])).unwrap();
        let r = arccot_int(&op, FRAC_PI_2, 1.0, &cfg()).unwrap();
        assert!((r.result[(0, 0)] - C64::new(PI / 4.0, 0.0)).norm() < 1e-7, "{:?}", r.result);
    }

    #[test]
    fn hp_of_resolvent() {
        let op = SectorialOp::new(CMatrix::from_real_diag(&[2.0])).unwrap();
        let f = funcat::resolvent(C64::new(1.0, 0.0)).unwrap();
        let r = hp_calc(&f, &op, &cfg()).unwrap();
        assert!((r.result[(0, 0)] - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-9);
    }
}
