// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Holomorphic functions on sectors.
//!
//! A [`SectorFn`] bundles a function with its exact derivatives (at least the
//! first, usually the second), the half-angle of the sector on which it is
//! holomorphic and bounded, its sectorial limits at `0` and `∞`, and, when one
//! exists, the bounded measure whose Laplace transform it is.
//!
//! Catalog entries are built by the `make_*` functions or parsed from keys
//! such as `resolvent:re=1,im=0,gamma=1` (see [`from_key`]). Combinators
//! ([`product`], [`scale`], [`shift`], [`power_compose`], [`invert_var`],
//! [`reciprocal`], [`bernstein_resolvent`], [`z_deriv`]) propagate
//! derivatives by the chain and product rules.
//!
//! All powers and logarithms use the principal branch, cut along `(-∞, 0]`.

use crate::quad::{self, Exec, LineOpts, Tol};
use crate::special::gamma;
use crate::Error;
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

pub type CFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;
pub type RFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A bounded measure on `[0, ∞)`: point masses plus an optional density.
#[derive(Clone, Default)]
pub struct Laplace {
    /// `(mass, location)` pairs.
    pub atoms: Vec<(C64, f64)>,
    pub density: Option<RFn>,
}

impl Laplace {
    /// Evaluate the Laplace transform at `z` by quadrature (used in tests).
    pub fn transform(&self, z: C64) -> C64 {
        let mut acc: C64 = self.atoms.iter().map(|(m, t)| m * (-z * t).exp()).sum();
        if let Some(d) = &self.density {
            let f = |u: f64| {
                let t = u.exp();
                d(t) * (-z * t).exp() * t
            };
            acc += quad::line(&f, &LineOpts::log_radial(40.0, 1e-13, 1e-12)).value;
        }
        acc
    }
}

/// A holomorphic function on the sector `Σ_ψ = {|arg z| < ψ}`.
#[derive(Clone)]
pub struct SectorFn {
    key: String,
    derivs: Vec<CFn>,
    /// Largest `ψ` such that the function is holomorphic and bounded on `Σ_ψ`.
    pub holo_angle: f64,
    /// Whether the boundary rays `arg z = ±holo_angle` belong to the domain.
    pub closed_boundary: bool,
    pub limit_at_inf: Option<C64>,
    pub limit_at_zero: Option<C64>,
    pub laplace: Option<Laplace>,
    /// Radii where the function or its derivative varies fastest; quadrature
    /// uses them as breakpoints.
    pub scales: Vec<f64>,
    /// Points excluded from evaluation.
    pub poles: Vec<C64>,
    /// A declared lower bound for `|f|` on the sector.
    pub lower_bound: Option<f64>,
}

impl std::fmt::Debug for SectorFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SectorFn")
            .field("key", &self.key)
            .field("holo_angle", &self.holo_angle)
            .field("order", &self.order())
            .finish()
    }
}

impl SectorFn {
    /// A function with value and first derivative; everything else defaults
    /// to "unknown".
    pub fn new(
        key: impl Into<String>,
        f: impl Fn(C64) -> C64 + Send + Sync + 'static,
        df: impl Fn(C64) -> C64 + Send + Sync + 'static,
        holo_angle: f64,
    ) -> Self {
        SectorFn {
            key: key.into(),
            derivs: vec![Arc::new(f), Arc::new(df)],
            holo_angle: holo_angle.min(PI),
            closed_boundary: true,
            limit_at_inf: None,
            limit_at_zero: None,
            laplace: None,
            scales: vec![1.0],
            poles: Vec::new(),
            lower_bound: None,
        }
    }

    pub fn with_second(mut self, d2: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        self.derivs.truncate(2);
        self.derivs.push(Arc::new(d2));
        self
    }

    pub fn with_limits(mut self, at_zero: Option<C64>, at_inf: Option<C64>) -> Self {
        self.limit_at_zero = at_zero;
        self.limit_at_inf = at_inf;
        self
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_laplace(mut self, l: Laplace) -> Self {
        self.laplace = Some(l);
        self
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    /// Number of derivatives available (the function itself not counted).
    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }

    #[inline]
    pub fn eval(&self, z: C64) -> C64 {
        (self.derivs[0])(z)
    }

    #[inline]
    pub fn deriv(&self, z: C64) -> C64 {
        (self.derivs[1])(z)
    }

    /// The `k`-th derivative, if known exactly.
    pub fn nth(&self, k: usize, z: C64) -> Option<C64> {
        self.derivs.get(k).map(|d| d(z))
    }

    fn deriv_fn(&self, k: usize) -> Option<CFn> {
        self.derivs.get(k).cloned()
    }

    /// Value at `z`, with `z = 0` mapped to the limit at zero.
    pub fn value_or_limit(&self, z: C64) -> C64 {
        if z == C64::new(0.0, 0.0) {
            if let Some(l) = self.limit_at_zero {
                return l;
            }
        }
        self.eval(z)
    }

    /// Checked evaluation: rejects points outside the sector of holomorphy,
    /// poles and non-finite values.
    pub fn try_eval(&self, z: C64) -> Result<C64, Error> {
        self.check_domain(z)?;
        let v = self.value_or_limit(z);
        if !v.is_finite() {
            return Err(Error::Domain(format!("{} is not finite at {z}", self.key)));
        }
        Ok(v)
    }

    fn check_domain(&self, z: C64) -> Result<(), Error> {
        let arg = z.arg().abs();
        let outside = if self.closed_boundary {
            arg > self.holo_angle + 1e-14
        } else {
            arg >= self.holo_angle - 1e-14
        };
        if z != C64::new(0.0, 0.0) && outside {
            return Err(Error::Domain(format!(
                "{} is evaluated outside its sector at {z} (arg {:.6}, sector {:.6})",
                self.key,
                z.arg(),
                self.holo_angle
            )));
        }
        if let Some(p) = self.poles.iter().find(|p| (z - **p).norm() < 1e-14) {
            return Err(Error::Domain(format!("{} has a singularity at {p}", self.key)));
        }
        Ok(())
    }

    /// The derivative as a function in its own right.
    pub fn derivative(&self) -> SectorFn {
        let mut derivs = self.derivs[1..].to_vec();
        if derivs.len() < 2 {
            // keep the invariant "value + first derivative": a missing second
            // derivative is flagged as NaN rather than silently approximated
            derivs.push(Arc::new(|_| C64::new(f64::NAN, f64::NAN)));
        }
        SectorFn {
            key: format!("deriv({})", self.key),
            derivs,
            holo_angle: self.holo_angle,
            closed_boundary: self.closed_boundary,
            limit_at_inf: None,
            limit_at_zero: None,
            laplace: self.laplace.as_ref().map(|l| Laplace {
                atoms: l.atoms.iter().map(|&(m, t)| (-m * t, t)).collect(),
                density: l.density.clone().map(|d| -> RFn { Arc::new(move |t| -d(t) * t) }),
            }),
            scales: self.scales.clone(),
            poles: self.poles.clone(),
            lower_bound: None,
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn fmt_c(z: C64) -> String {
    format!("re={},im={}", fmt_num(z.re), fmt_num(z.im))
}

/// `z ↦ c`.
pub fn constant(value: C64) -> SectorFn {
    SectorFn::new(format!("const:{}", fmt_c(value)), move |_| value, |_| c(0.0), PI)
        .with_second(|_| c(0.0))
        .with_limits(Some(value), Some(value))
        .with_laplace(Laplace {
            atoms: vec![(value, 0.0)],
            density: None,
        })
}

/// `r_λ^γ(z) = (z + λ)^{-γ}`.
pub fn make_resolvent_power(lambda: C64, gamma_: f64) -> Result<SectorFn, Error> {
    if lambda.im == 0.0 && lambda.re <= 0.0 || !lambda.is_finite() {
        return Err(Error::Domain(format!("resolvent parameter {lambda} lies on (-inf, 0]")));
    }
    if gamma_.is_nan() || gamma_ <= 0.0 {
        return Err(Error::Domain(format!("resolvent power must be positive, got {gamma_}")));
    }
    let g = gamma_;
    let lam = lambda;
    let density: RFn = Arc::new(move |t: f64| {
        if t <= 0.0 {
            return c(0.0);
        }
        (-lam * t).exp() * (t.powf(g - 1.0) / gamma(g))
    });
    let mut f = SectorFn::new(
        format!("resolvent:{},gamma={}", fmt_c(lambda), fmt_num(g)),
        move |z| (z + lam).powf(-g),
        move |z| -g * (z + lam).powf(-g - 1.0),
        PI - lambda.arg().abs(),
    )
    .with_second(move |z| g * (g + 1.0) * (z + lam).powf(-g - 2.0))
    .with_limits(Some(lambda.powf(-g)), Some(c(0.0)))
    .with_scales(vec![lambda.norm()])
    .with_laplace(Laplace {
        atoms: vec![],
        density: Some(density),
    });
    f.poles = vec![-lambda];
    f.lower_bound = None;
    Ok(f)
}

/// `r_λ = (z + λ)^{-1}`, shorthand for [`make_resolvent_power`] with `γ = 1`.
pub fn resolvent(lambda: C64) -> Result<SectorFn, Error> {
    make_resolvent_power(lambda, 1.0)
}

fn zpow(z: C64, p: f64) -> C64 {
    if p == 0.0 {
        return c(1.0);
    }
    if z == C64::new(0.0, 0.0) {
        return if p > 0.0 { c(0.0) } else { c(f64::INFINITY) };
    }
    if p.fract() == 0.0 && p.abs() < 64.0 {
        return z.powi(p as i32);
    }
    z.powf(p)
}

/// `z ↦ z^ν e^{-tz}`.
pub fn make_exp_poly(nu: f64, t: f64) -> Result<SectorFn, Error> {
    if nu.is_nan() || nu < 0.0 || t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("exp_poly needs nu >= 0 and t > 0, got {nu}, {t}")));
    }
    let mut f = SectorFn::new(
        format!("exp_poly:nu={},t={}", fmt_num(nu), fmt_num(t)),
        move |z| zpow(z, nu) * (-t * z).exp(),
        move |z| (-t * z).exp() * (nu * zpow(z, nu - 1.0) - t * zpow(z, nu)),
        FRAC_PI_2,
    )
    .with_second(move |z| {
        (-t * z).exp()
            * (nu * (nu - 1.0) * zpow(z, nu - 2.0) - 2.0 * t * nu * zpow(z, nu - 1.0)
                + t * t * zpow(z, nu))
    })
    .with_limits(Some(c(if nu == 0.0 { 1.0 } else { 0.0 })), Some(c(0.0)))
    .with_scales(vec![1.0 / t]);
    if nu == 0.0 {
        f.laplace = Some(Laplace {
            atoms: vec![(c(1.0), t)],
            density: None,
        });
    }
    Ok(f)
}

/// `arccot z = (1/2i) log((z+i)/(z-i))` on the right half-plane.
pub fn make_arccot() -> SectorFn {
    let mut f = SectorFn::new(
        "arccot",
        |z: C64| ((z + I) / (z - I)).ln() / (2.0 * I),
        |z: C64| -1.0 / (z * z + 1.0),
        FRAC_PI_2,
    )
    .with_second(|z: C64| 2.0 * z / (z * z + 1.0).powi(2))
    .with_limits(Some(c(FRAC_PI_2)), Some(c(0.0)))
    .with_scales(vec![1.0]);
    f.closed_boundary = false;
    f.poles = vec![I, -I];
    f
}

/// The Cayley powers `f_n(z) = ((z-1)/(z+1))^n`.
pub fn make_cayley_power(n: u32) -> Result<SectorFn, Error> {
    if n == 0 {
        return Err(Error::Domain("cayley power needs n >= 1".into()));
    }
    let ni = n as i32;
    let nf = f64::from(n);
    // (z-1)/(z+1) = 1 - 2/(z+1): the measure is δ_0 - 2 e^{-t} L^{(1)}_{n-1}(2t) dt
    let density: RFn = Arc::new(move |t: f64| c(-2.0 * (-t).exp() * laguerre1(n - 1, 2.0 * t)));
    let d2 = move |z: C64| {
        if ni == 1 {
            -4.0 / (z + 1.0).powi(3)
        } else {
            4.0 * nf * (nf - z) * ((z - 1.0) / (z + 1.0)).powi(ni - 2) / (z + 1.0).powi(4)
        }
    };
    let mut f = SectorFn::new(
        format!("cayley:n={n}"),
        move |z: C64| ((z - 1.0) / (z + 1.0)).powi(ni),
        // ratio first: separate powers overflow for large |z|
        move |z: C64| 2.0 * nf * ((z - 1.0) / (z + 1.0)).powi(ni - 1) / (z + 1.0).powi(2),
        PI,
    )
    .with_second(d2)
    .with_limits(Some(c(if n % 2 == 0 { 1.0 } else { -1.0 })), Some(c(1.0)))
    // |f_n'| lives near |z| ~ 1/(2n) and |z| ~ 2n once n is large
    .with_scales(if n > 2 { vec![0.5 / nf, 1.0, 2.0 * nf] } else { vec![1.0] })
    .with_laplace(Laplace {
        atoms: vec![(c(1.0), 0.0)],
        density: Some(density),
    });
    f.poles = vec![c(-1.0)];
    Ok(f)
}

/// Generalised Laguerre polynomial `L_m^{(1)}(x)` by the three-term recurrence.
fn laguerre1(m: u32, x: f64) -> f64 {
    let alpha = 1.0;
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..m {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `f_k(z) = π^{-1}(z + 1 + ik)^{-2}`, the family on which the one-sided and
/// two-sided Hardy norms are compared.
pub fn make_hardy_family(k: f64) -> SectorFn {
    let w = C64::new(1.0, k);
    let mut f = SectorFn::new(
        format!("hardy:k={}", fmt_num(k)),
        move |z: C64| (z + w).powi(-2) / PI,
        move |z: C64| -2.0 * (z + w).powi(-3) / PI,
        PI - w.arg().abs(),
    )
    .with_second(move |z: C64| 6.0 * (z + w).powi(-4) / PI)
    .with_limits(Some(w.powi(-2) / PI), Some(c(0.0)))
    .with_scales(vec![w.norm()])
    .with_laplace(Laplace {
        atoms: vec![],
        density: Some(Arc::new(move |t: f64| (-w * t).exp() * (t / PI))),
    });
    f.poles = vec![-w];
    f
}

/// `e_{γ,λ}(z) = exp(-λ z^γ)`.
pub fn make_exp_power(gamma_: f64, lambda: C64) -> Result<SectorFn, Error> {
    if gamma_.is_nan() || gamma_ <= 0.0 || lambda.re <= 0.0 && lambda.im == 0.0 {
        return Err(Error::Domain(format!("exp_power needs gamma > 0 and lambda off (-inf,0], got {gamma_}, {lambda}")));
    }
    if lambda.arg().abs() >= FRAC_PI_2 {
        return Err(Error::Domain(format!("exp_power needs Re lambda > 0, got {lambda}")));
    }
    let g = gamma_;
    let lam = lambda;
    let holo = ((FRAC_PI_2 - lambda.arg().abs()) / g).min(PI);
    let mut f = SectorFn::new(
        format!("exp_power:gamma={},{}", fmt_num(g), fmt_c(lambda)),
        move |z: C64| (-lam * zpow(z, g)).exp(),
        move |z: C64| -lam * g * zpow(z, g - 1.0) * (-lam * zpow(z, g)).exp(),
        holo,
    )
    .with_second(move |z: C64| {
        let e = (-lam * zpow(z, g)).exp();
        e * ((lam * g * zpow(z, g - 1.0)).powi(2) - lam * g * (g - 1.0) * zpow(z, g - 2.0))
    })
    .with_limits(Some(c(1.0)), Some(c(0.0)))
    .with_scales(vec![lambda.norm().powf(-1.0 / g)]);
    if g == 1.0 && lambda.im == 0.0 {
        f.laplace = Some(Laplace {
            atoms: vec![(c(1.0), lambda.re)],
            density: None,
        });
    } else if g == 0.5 && lambda.im == 0.0 {
        let l = lambda.re;
        f.laplace = Some(Laplace {
            atoms: vec![],
            density: Some(Arc::new(move |t: f64| {
                if t <= 0.0 {
                    return c(0.0);
                }
                c(l / (2.0 * PI.sqrt()) * t.powf(-1.5) * (-l * l / (4.0 * t)).exp())
            })),
        });
    }
    Ok(f)
}

/// `z ↦ z (z + λ)^{-p}` for `p ∈ {1, 2}`.
pub fn make_zres(p: u32, lambda: C64) -> Result<SectorFn, Error> {
    if !(1..=2).contains(&p) || lambda.im == 0.0 && lambda.re <= 0.0 {
        return Err(Error::Domain(format!("zres needs p in {{1,2}} and lambda off (-inf,0], got {p}, {lambda}")));
    }
    let pi = p as i32;
    let pf = f64::from(p);
    let lam = lambda;
    let density: RFn = if p == 1 {
        Arc::new(move |t: f64| -lam * (-lam * t).exp())
    } else {
        Arc::new(move |t: f64| (-lam * t).exp() * (1.0 - lam * t))
    };
    let mut f = SectorFn::new(
        format!("zres:p={p},{}", fmt_c(lambda)),
        move |z: C64| z * (z + lam).powi(-pi),
        move |z: C64| (z + lam).powi(-pi) - pf * z * (z + lam).powi(-pi - 1),
        PI - lambda.arg().abs(),
    )
    .with_second(move |z: C64| -2.0 * pf * (z + lam).powi(-pi - 1) + pf * (pf + 1.0) * z * (z + lam).powi(-pi - 2))
    .with_limits(Some(c(0.0)), Some(c(if p == 1 { 1.0 } else { 0.0 })))
    .with_scales(vec![lambda.norm()])
    .with_laplace(Laplace {
        atoms: if p == 1 { vec![(c(1.0), 0.0)] } else { vec![] },
        density: Some(density),
    });
    f.poles = vec![-lambda];
    Ok(f)
}

fn mul_opt(a: Option<C64>, b: Option<C64>) -> Option<C64> {
    Some(a? * b?)
}

fn union_scales(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().chain(b).copied().filter(|r| r.is_finite() && *r > 0.0).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|x, y| (*x / *y - 1.0).abs() < 1e-12);
    v
}

/// Pointwise product `fg`.
pub fn product(f: &SectorFn, g: &SectorFn) -> SectorFn {
    let (f0, f1, g0, g1) = (f.derivs[0].clone(), f.derivs[1].clone(), g.derivs[0].clone(), g.derivs[1].clone());
    let (a0, a1, b0, b1) = (f0.clone(), f1.clone(), g0.clone(), g1.clone());
    let (p0, q0) = (f0.clone(), g0.clone());
    let mut out = SectorFn::new(
        format!("product({};{})", f.key, g.key),
        move |z| p0(z) * q0(z),
        move |z| f1(z) * g0(z) + f0(z) * g1(z),
        f.holo_angle.min(g.holo_angle),
    )
    .with_limits(mul_opt(f.limit_at_zero, g.limit_at_zero), mul_opt(f.limit_at_inf, g.limit_at_inf))
    .with_scales(union_scales(&f.scales, &g.scales));
    if let (Some(f2), Some(g2)) = (f.deriv_fn(2), g.deriv_fn(2)) {
        out = out.with_second(move |z| f2(z) * b0(z) + 2.0 * a1(z) * b1(z) + a0(z) * g2(z));
    }
    out.closed_boundary = f.closed_boundary && g.closed_boundary;
    out.poles = f.poles.iter().chain(&g.poles).copied().collect();
    if let (Some(lf), Some(lg)) = (&f.laplace, &g.laplace) {
        out.laplace = Some(convolve(lf, lg));
    }
    out.lower_bound = f.lower_bound.zip(g.lower_bound).map(|(x, y)| x * y);
    out
}

/// Linear combination `Σ c_k f_k` (used for residuals of rational fits).
pub fn lincomb(terms: &[(C64, SectorFn)]) -> SectorFn {
    assert!(!terms.is_empty(), "lincomb of nothing");
    let parts: Vec<(C64, CFn, CFn)> = terms.iter().map(|(a, f)| (*a, f.derivs[0].clone(), f.derivs[1].clone())).collect();
    let parts1 = parts.clone();
    let key = terms
        .iter()
        .map(|(a, f)| format!("{}*{}", fmt_c(*a), f.key))
        .collect::<Vec<_>>()
        .join(";");
    let lim = |sel: fn(&SectorFn) -> Option<C64>| -> Option<C64> {
        terms.iter().map(|(a, f)| sel(f).map(|v| a * v)).sum()
    };
    let mut out = SectorFn::new(
        format!("lincomb({key})"),
        move |z| parts.iter().map(|(a, f, _)| a * f(z)).sum(),
        move |z| parts1.iter().map(|(a, _, d)| a * d(z)).sum(),
        terms.iter().map(|(_, f)| f.holo_angle).fold(PI, f64::min),
    )
    .with_limits(lim(|f| f.limit_at_zero), lim(|f| f.limit_at_inf));
    let seconds: Option<Vec<(C64, CFn)>> = terms.iter().map(|(a, f)| f.deriv_fn(2).map(|d| (*a, d))).collect();
    if let Some(seconds) = seconds {
        out = out.with_second(move |z| seconds.iter().map(|(a, d)| a * d(z)).sum());
    }
    out.scales = terms.iter().fold(Vec::new(), |acc, (_, f)| union_scales(&acc, &f.scales));
    out.poles = terms.iter().flat_map(|(_, f)| f.poles.clone()).collect();
    out.closed_boundary = terms.iter().all(|(_, f)| f.closed_boundary);
    out
}

/// Convolution of two bounded measures.
fn convolve(a: &Laplace, b: &Laplace) -> Laplace {
    let mut atoms = Vec::new();
    for &(ma, ta) in &a.atoms {
        for &(mb, tb) in &b.atoms {
            atoms.push((ma * mb, ta + tb));
        }
    }
    let mut pieces: Vec<RFn> = Vec::new();
    for (atoms_x, dens_y) in [(&a.atoms, &b.density), (&b.atoms, &a.density)] {
        if let Some(d) = dens_y {
            for &(m, t0) in atoms_x.iter() {
                let d = d.clone();
                pieces.push(Arc::new(move |t: f64| if t > t0 { m * d(t - t0) } else { c(0.0) }));
            }
        }
    }
    if let (Some(da), Some(db)) = (a.density.clone(), b.density.clone()) {
        pieces.push(Arc::new(move |t: f64| {
            if t <= 0.0 {
                return c(0.0);
            }
            let g = |x: f64| da(x) * db(t - x);
            quad::adaptive(&g, 0.0, t, &[0.5 * t], Tol::new(1e-14, 1e-12), Exec::Serial).value
        }));
    }
    let density: Option<RFn> = if pieces.is_empty() {
        None
    } else {
        Some(Arc::new(move |t: f64| pieces.iter().map(|p| p(t)).sum()))
    };
    Laplace { atoms, density }
}

/// `z ↦ f(tz)` for `t > 0`.
pub fn scale(f: &SectorFn, t: f64) -> SectorFn {
    assert!(t > 0.0 && t.is_finite(), "scale factor must be positive");
    let (f0, f1) = (f.derivs[0].clone(), f.derivs[1].clone());
    let mut out = SectorFn::new(
        format!("scale({};t={})", f.key, fmt_num(t)),
        move |z| f0(z * t),
        move |z| t * f1(z * t),
        f.holo_angle,
    )
    .with_limits(f.limit_at_zero, f.limit_at_inf)
    .with_scales(f.scales.iter().map(|r| r / t).collect());
    if let Some(f2) = f.deriv_fn(2) {
        out = out.with_second(move |z| t * t * f2(z * t));
    }
    out.closed_boundary = f.closed_boundary;
    out.poles = f.poles.iter().map(|p| p / t).collect();
    out.lower_bound = f.lower_bound;
    out.laplace = f.laplace.as_ref().map(|l| Laplace {
        atoms: l.atoms.iter().map(|&(m, s)| (m, s * t)).collect(),
        density: l.density.clone().map(|d| -> RFn { Arc::new(move |s: f64| d(s / t) / t) }),
    });
    out
}

/// `z ↦ f(z + τ)` for `τ` in the closed right half-plane.
pub fn shift(f: &SectorFn, tau: C64) -> SectorFn {
    let (f0, f1) = (f.derivs[0].clone(), f.derivs[1].clone());
    let mut out = SectorFn::new(
        format!("shift({};{})", f.key, fmt_c(tau)),
        move |z| f0(z + tau),
        move |z| f1(z + tau),
        f.holo_angle.min(FRAC_PI_2).max(if tau == c(0.0) { f.holo_angle } else { 0.0 }),
    )
    .with_limits(Some(f.value_or_limit(tau)), f.limit_at_inf)
    .with_scales(union_scales(&f.scales, &[tau.norm()]));
    if let Some(f2) = f.deriv_fn(2) {
        out = out.with_second(move |z| f2(z + tau));
    }
    out.closed_boundary = f.closed_boundary;
    out.poles = f.poles.iter().map(|p| p - tau).collect();
    out.lower_bound = f.lower_bound;
    out.laplace = f.laplace.as_ref().map(|l| Laplace {
        atoms: l.atoms.iter().map(|&(m, s)| (m * (-tau * s).exp(), s)).collect(),
        density: l.density.clone().map(|d| -> RFn { Arc::new(move |s: f64| d(s) * (-tau * s).exp()) }),
    });
    out
}

/// `z ↦ f(z^γ)`; holomorphic on `Σ_{min(π, ψ/γ)}`.
pub fn power_compose(f: &SectorFn, gamma_: f64) -> SectorFn {
    assert!(gamma_ > 0.0 && gamma_.is_finite(), "power must be positive");
    let g = gamma_;
    let (f0, f1) = (f.derivs[0].clone(), f.derivs[1].clone());
    let lim0 = f.limit_at_zero;
    let f1b = f1.clone();
    let mut out = SectorFn::new(
        format!("compose({};gamma={})", f.key, fmt_num(g)),
        move |z: C64| {
            if z == c(0.0) {
                if let Some(l) = lim0 {
                    return l;
                }
            }
            f0(zpow(z, g))
        },
        move |z: C64| g * zpow(z, g - 1.0) * f1(zpow(z, g)),
        (f.holo_angle / g).min(PI),
    )
    .with_limits(f.limit_at_zero, f.limit_at_inf)
    .with_scales(f.scales.iter().map(|r| r.powf(1.0 / g)).collect());
    if let Some(f2) = f.deriv_fn(2) {
        out = out.with_second(move |z: C64| {
            let w = zpow(z, g);
            g * (g - 1.0) * zpow(z, g - 2.0) * f1b(w) + g * g * zpow(z, 2.0 * g - 2.0) * f2(w)
        });
    }
    out.closed_boundary = f.closed_boundary;
    out.lower_bound = f.lower_bound;
    out.poles = f
        .poles
        .iter()
        .filter(|p| p.arg().abs() / g <= PI)
        .map(|p| p.powf(1.0 / g))
        .collect();
    if g == 1.0 {
        out.laplace = f.laplace.clone();
    }
    out
}

/// `z ↦ f(1/z)`; swaps the limits at `0` and `∞`.
pub fn invert_var(f: &SectorFn) -> SectorFn {
    let (f0, f1) = (f.derivs[0].clone(), f.derivs[1].clone());
    let f1b = f1.clone();
    let (l0, linf) = (f.limit_at_zero, f.limit_at_inf);
    let mut out = SectorFn::new(
        format!("invert({})", f.key),
        move |z: C64| {
            if z == c(0.0) {
                if let Some(l) = linf {
                    return l;
                }
            }
            f0(z.inv())
        },
        move |z: C64| -f1(z.inv()) / (z * z),
        f.holo_angle,
    )
    .with_limits(linf, l0)
    .with_scales(f.scales.iter().map(|r| 1.0 / r).collect());
    if let Some(f2) = f.deriv_fn(2) {
        out = out.with_second(move |z: C64| {
            let w = z.inv();
            2.0 * f1b(w) * w.powi(3) + f2(w) * w.powi(4)
        });
    }
    out.closed_boundary = f.closed_boundary;
    out.lower_bound = f.lower_bound;
    out.poles = f.poles.iter().filter(|p| p.norm() > 0.0).map(|p| p.inv()).collect();
    out
}

/// `z ↦ 1/f(z)`; requires `|f| ≥ m > 0` on the sector, either declared on `f`
/// or passed as `lower`.
pub fn reciprocal(f: &SectorFn, lower: Option<f64>) -> Result<SectorFn, Error> {
    let m = lower.or(f.lower_bound).filter(|m| *m > 0.0).ok_or_else(|| {
        Error::Domain(format!("reciprocal of {} needs a positive lower bound for |f|", f.key))
    })?;
    let (f0, f1) = (f.derivs[0].clone(), f.derivs[1].clone());
    let (a0, a1, v0) = (f0.clone(), f1.clone(), f0.clone());
    let inv = |v: Option<C64>| v.filter(|x| x.norm() > 0.0).map(|x| x.inv());
    let mut out = SectorFn::new(
        format!("reciprocal({};m={})", f.key, fmt_num(m)),
        move |z| v0(z).inv(),
        move |z| {
            let v = f0(z);
            -f1(z) / (v * v)
        },
        f.holo_angle,
    )
    .with_limits(inv(f.limit_at_zero), inv(f.limit_at_inf))
    .with_scales(f.scales.clone());
    if let Some(f2) = f.deriv_fn(2) {
        out = out.with_second(move |z| {
            let v = a0(z);
            let d = a1(z);
            -f2(z) / (v * v) + 2.0 * d * d / (v * v * v)
        });
    }
    out.closed_boundary = f.closed_boundary;
    out.poles = f.poles.clone();
    Ok(out)
}

/// `z ↦ z f'(z)`; needs the second derivative of `f`.
pub fn z_deriv(f: &SectorFn) -> Result<SectorFn, Error> {
    let f2 = f
        .deriv_fn(2)
        .ok_or_else(|| Error::Unsupported(format!("z f' of {} needs an exact second derivative", f.key)))?;
    let f1 = f.derivs[1].clone();
    let f1b = f1.clone();
    let mut out = SectorFn::new(
        format!("zderiv({})", f.key),
        move |z| z * f1(z),
        move |z| f1b(z) + z * f2(z),
        f.holo_angle,
    )
    .with_limits(Some(c(0.0)), Some(c(0.0)))
    .with_scales(f.scales.clone());
    out.closed_boundary = f.closed_boundary;
    out.poles = f.poles.clone();
    Ok(out)
}

/// A Bernstein function `g(z) = a + bz + ∫ (1 - e^{-zs}) dμ(s)`.
#[derive(Clone)]
pub struct BernsteinFn {
    pub a: f64,
    pub b: f64,
    /// `(mass, location)` pairs of the Lévy measure.
    pub atoms: Vec<(f64, f64)>,
    /// Density of the Lévy measure on `(0, ∞)`.
    pub density: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    closed: Option<[CFn; 3]>,
    /// `g(Σ_ψ) ⊂ Σ_{ψ·angle_factor}` for all `ψ < π`, when known.
    angle_factor: Option<f64>,
    key: String,
}

impl std::fmt::Debug for BernsteinFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BernsteinFn").field("key", &self.key).finish()
    }
}

impl BernsteinFn {
    /// `a + bz + Σ m_k (1 - e^{-z s_k})`.
    pub fn atomic(a: f64, b: f64, atoms: Vec<(f64, f64)>) -> Result<Self, Error> {
        // a + bz maps every sector into itself; jumps do not
        let angle_factor = (atoms.is_empty() && b > 0.0).then_some(1.0);
        let g = BernsteinFn {
            a,
            b,
            atoms,
            density: None,
            closed: None,
            angle_factor,
            key: String::new(),
        };
        let key = format!(
            "atomic:a={},b={}{}",
            fmt_num(a),
            fmt_num(b),
            g.atoms.iter().map(|(m, s)| format!(",m={},at={}", fmt_num(*m), fmt_num(*s))).collect::<String>()
        );
        let g = BernsteinFn { key, ..g };
        g.validate()?;
        Ok(g)
    }

    /// `z^α` for `α ∈ (0, 1]`, with Lévy density `α/Γ(1-α) s^{-1-α}`.
    pub fn power(alpha: f64) -> Result<Self, Error> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("power Bernstein function needs alpha in (0,1], got {alpha}")));
        }
        if alpha == 1.0 {
            let mut g = Self::atomic(0.0, 1.0, vec![])?;
            g.angle_factor = Some(1.0);
            g.key = "power:alpha=1".into();
            return Ok(g);
        }
        let k = alpha / gamma(1.0 - alpha);
        Ok(BernsteinFn {
            a: 0.0,
            b: 0.0,
            atoms: vec![],
            density: Some(Arc::new(move |s: f64| k * s.powf(-1.0 - alpha))),
            closed: Some([
                Arc::new(move |z: C64| zpow(z, alpha)),
                Arc::new(move |z: C64| alpha * zpow(z, alpha - 1.0)),
                Arc::new(move |z: C64| alpha * (alpha - 1.0) * zpow(z, alpha - 2.0)),
            ]),
            angle_factor: Some(alpha),
            key: format!("power:alpha={}", fmt_num(alpha)),
        })
    }

    /// `z ↦ √z`.
    pub fn sqrt() -> Self {
        let mut g = Self::power(0.5).expect("valid exponent");
        g.key = "sqrt".into();
        g
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    /// Checks `a, b ≥ 0`, non-negative masses and `∫ s/(1+s) dμ < ∞`.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.a >= 0.0 && self.b >= 0.0) {
            return Err(Error::Domain(format!("Bernstein function needs a, b >= 0, got {}, {}", self.a, self.b)));
        }
        if self.atoms.iter().any(|&(m, s)| !(m >= 0.0 && s > 0.0)) {
            return Err(Error::Domain("Bernstein atoms need mass >= 0 at locations > 0".into()));
        }
        if let Some(d) = &self.density {
            let d = d.clone();
            let f = move |u: f64| {
                let s = u.exp();
                d(s) * s / (1.0 + s) * s
            };
            let r = quad::line(&f, &LineOpts::log_radial(40.0, 1e-10, 1e-8));
            if r.divergent || !r.value.is_finite() {
                return Err(Error::Domain(format!("Levy measure of {} is not admissible", self.key)));
            }
        }
        Ok(())
    }

    /// Total mass of the Lévy measure (infinite for densities like `s^{-1-α}`).
    fn total_mass(&self) -> f64 {
        if self.density.is_some() {
            return f64::INFINITY;
        }
        self.atoms.iter().map(|(m, _)| m).sum()
    }

    /// `g(∞)`, infinite unless `g` is bounded.
    pub fn limit_at_inf(&self) -> f64 {
        if self.b > 0.0 {
            f64::INFINITY
        } else {
            self.a + self.total_mass()
        }
    }

    fn levy_integral(&self, z: C64, k: usize) -> C64 {
        let Some(d) = &self.density else { return c(0.0) };
        let d = d.clone();
        // k = 0: ∫(1 - e^{-zs}) dμ, k = 1: ∫ s e^{-zs} dμ, k = 2: -∫ s² e^{-zs} dμ
        let f = move |u: f64| -> C64 {
            let s = u.exp();
            let e = (-z * s).exp();
            let w = d(s) * s;
            match k {
                0 => (1.0 - e) * w,
                1 => e * (s * w),
                _ => -e * (s * s * w),
            }
        };
        quad::line(&f, &LineOpts::log_radial(40.0, 1e-13, 1e-11)).value
    }

    pub fn eval(&self, z: C64) -> C64 {
        if let Some(cf) = &self.closed {
            return self.a + self.b * z + cf[0](z);
        }
        let atoms: C64 = self.atoms.iter().map(|&(m, s)| m * (1.0 - (-z * s).exp())).sum();
        self.a + self.b * z + atoms + self.levy_integral(z, 0)
    }

    pub fn deriv(&self, z: C64) -> C64 {
        if let Some(cf) = &self.closed {
            return self.b + cf[1](z);
        }
        let atoms: C64 = self.atoms.iter().map(|&(m, s)| m * s * (-z * s).exp()).sum();
        self.b + atoms + self.levy_integral(z, 1)
    }

    pub fn deriv2(&self, z: C64) -> C64 {
        if let Some(cf) = &self.closed {
            return cf[2](z);
        }
        let atoms: C64 = self.atoms.iter().map(|&(m, s)| -m * s * s * (-z * s).exp()).sum();
        atoms + self.levy_integral(z, 2)
    }

    /// Half-angle of the largest sector on which `(λ + g)^{-1}` is
    /// holomorphic and bounded.
    fn resolvent_angle(&self, lambda: C64) -> f64 {
        let room = PI - lambda.arg().abs();
        match self.angle_factor {
            Some(a) => (room / a).min(PI),
            None => room.min(FRAC_PI_2),
        }
    }
}

/// `z ↦ (λ + g(z))^{-1}` for a Bernstein function `g`.
pub fn bernstein_resolvent(g: &BernsteinFn, lambda: C64) -> Result<SectorFn, Error> {
    if lambda.norm() == 0.0 || lambda.arg().abs() >= PI {
        return Err(Error::Domain(format!("Bernstein resolvent needs lambda off (-inf, 0], got {lambda}")));
    }
    let (g0, g1, g2) = (g.clone(), g.clone(), g.clone());
    let ginf = g.limit_at_inf();
    let lim_inf = if ginf.is_infinite() { c(0.0) } else { (lambda + ginf).inv() };
    let scale_r = match g.angle_factor {
        Some(a) => lambda.norm().powf(1.0 / a),
        None => lambda.norm(),
    };
    let mut f = SectorFn::new(
        format!("bres(g={};{})", g.key, fmt_c(lambda)),
        move |z| (lambda + g0.eval(z)).inv(),
        move |z| {
            let v = lambda + g1.eval(z);
            -g1.deriv(z) / (v * v)
        },
        g.resolvent_angle(lambda),
    )
    .with_second(move |z| {
        let v = lambda + g2.eval(z);
        let d = g2.deriv(z);
        -g2.deriv2(z) / (v * v) + 2.0 * d * d / (v * v * v)
    })
    .with_limits(Some((lambda + g.a).inv()), Some(lim_inf))
    .with_scales(vec![scale_r]);
    f.closed_boundary = g.angle_factor.is_some();
    Ok(f)
}

fn parse_params(s: &str) -> Result<Vec<(String, f64)>, Error> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected name=value in '{kv}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{v}' in '{kv}'")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

struct Params(Vec<(String, f64)>);

impl Params {
    fn get(&self, name: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
    fn or(&self, name: &str, default: f64) -> f64 {
        self.get(name).unwrap_or(default)
    }
    fn complex(&self) -> C64 {
        C64::new(self.or("re", 1.0), self.or("im", 0.0))
    }
}

/// Split `a;b;c` at top-level semicolons (parentheses nest).
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Parse a Bernstein key: `sqrt`, `power:alpha=..`, `id`, `jump:m=..,at=..`,
/// or `atomic:a=..,b=..`.
pub fn bernstein_from_key(key: &str) -> Result<BernsteinFn, Error> {
    let (name, rest) = key.split_once(':').unwrap_or((key, ""));
    let p = Params(parse_params(rest)?);
    match name.trim() {
        "sqrt" => Ok(BernsteinFn::sqrt()),
        "id" => BernsteinFn::power(1.0),
        "power" => BernsteinFn::power(p.or("alpha", 0.5)),
        "jump" => BernsteinFn::atomic(0.0, 0.0, vec![(p.or("m", 1.0), p.or("at", 1.0))]),
        "atomic" => BernsteinFn::atomic(p.or("a", 0.0), p.or("b", 0.0), vec![]),
        other => Err(Error::Parse(format!("unknown Bernstein function '{other}'"))),
    }
}

/// Build a catalog entry from its key.
///
/// Leaf keys: `const:re=..,im=..`, `resolvent:re=..,im=..,gamma=..` (or the
/// shorthand `resolvent:1`), `exp_poly:nu=..,t=..`, `arccot`, `cayley:n=..`,
/// `hardy:k=..`, `exp_power:gamma=..,re=..,im=..`, `zres:p=..,re=..,im=..`.
/// Combinators: `product(K;K)`, `scale(K;t=..)`, `shift(K;re=..,im=..)`,
/// `compose(K;gamma=..)`, `invert(K)`, `reciprocal(K;m=..)`, `zderiv(K)`,
/// `bres(g=G;re=..,im=..)` with `G` a Bernstein key.
pub fn from_key(key: &str) -> Result<SectorFn, Error> {
    let key = key.trim();
    if let Some(open) = key.find('(') {
        if !key.ends_with(')') {
            return Err(Error::Parse(format!("unbalanced parentheses in '{key}'")));
        }
        let name = &key[..open];
        let args = split_top(&key[open + 1..key.len() - 1]);
        let params = |i: usize| -> Result<Params, Error> { Ok(Params(parse_params(args.get(i).copied().unwrap_or(""))?)) };
        return match name {
            "product" if args.len() == 2 => Ok(product(&from_key(args[0])?, &from_key(args[1])?)),
            "scale" => {
                let t = params(1)?.or("t", 1.0);
                if !(t > 0.0) {
                    return Err(Error::Domain(format!("scale needs t > 0, got {t}")));
                }
                Ok(scale(&from_key(args[0])?, t))
            }
            "shift" => Ok(shift(&from_key(args[0])?, params(1)?.complex_or_zero())),
            "compose" => {
                let g = params(1)?.or("gamma", 1.0);
                if !(g > 0.0) {
                    return Err(Error::Domain(format!("compose needs gamma > 0, got {g}")));
                }
                Ok(power_compose(&from_key(args[0])?, g))
            }
            "invert" => Ok(invert_var(&from_key(args[0])?)),
            "reciprocal" => reciprocal(&from_key(args[0])?, params(1)?.get("m")),
            "zderiv" => z_deriv(&from_key(args[0])?),
            "bres" => {
                let g = args[0]
                    .strip_prefix("g=")
                    .ok_or_else(|| Error::Parse("bres expects g=<bernstein key> first".into()))?;
                bernstein_resolvent(&bernstein_from_key(g)?, params(1)?.complex())
            }
            _ => Err(Error::Parse(format!("unknown combinator '{name}' in '{key}'"))),
        };
    }
    let (name, rest) = key.split_once(':').unwrap_or((key, ""));
    if name == "resolvent" && !rest.contains('=') && !rest.is_empty() {
        let re: f64 = rest.parse().map_err(|_| Error::Parse(format!("bad resolvent shorthand '{key}'")))?;
        return resolvent(c(re));
    }
    let p = Params(parse_params(rest)?);
    match name {
        "const" => Ok(constant(C64::new(p.or("re", 0.0), p.or("im", 0.0)))),
        "resolvent" => make_resolvent_power(p.complex(), p.or("gamma", 1.0)),
        "exp_poly" => make_exp_poly(p.or("nu", 0.0), p.or("t", 1.0)),
        "exp" => make_exp_poly(0.0, p.or("t", 1.0)),
        "arccot" => Ok(make_arccot()),
        "cayley" => {
            let n = p.or("n", 1.0);
            if !(n >= 1.0 && n.fract() == 0.0 && n < 1e6) {
                return Err(Error::Domain(format!("cayley needs a positive integer n, got {n}")));
            }
            make_cayley_power(n as u32)
        }
        "hardy" => Ok(make_hardy_family(p.or("k", 0.0))),
        "exp_power" => make_exp_power(p.or("gamma", 1.0), p.complex()),
        "zres" => {
            let n = p.or("p", 1.0);
            if !(n == 1.0 || n == 2.0) {
                return Err(Error::Domain(format!("zres needs p in {{1,2}}, got {n}")));
            }
            make_zres(n as u32, p.complex())
        }
        _ => Err(Error::Parse(format!("unknown catalog key '{key}'"))),
    }
}

impl Params {
    fn complex_or_zero(&self) -> C64 {
        C64::new(self.or("re", 0.0), self.or("im", 0.0))
    }
}
