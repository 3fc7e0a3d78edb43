// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for the operator side.
//!
//! Everything here works on small matrices (`n ≤ 256`). A [`SectorialOp`]
//! keeps a complex Schur form `A = Q T Q*` so that resolvents, fractional
//! powers and the quadrature integrands of the calculi can be evaluated on the
//! upper triangular factor and transformed back once.

use crate::quad::{self, LineOpts, QuadValue};
use crate::Error;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Mutex;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Largest matrix the loaders accept.
pub const MAX_DIM: usize = 256;

/// A square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self, Error> {
        if data.len() != n * n {
            return Err(Error::Parse(format!("expected {} entries for n = {n}, got {}", n * n, data.len())));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        Ok(CMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![ONE; n])
    }

    pub fn from_diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self::from_diag(&d.iter().map(|x| C64::new(*x, 0.0)).collect::<Vec<_>>())
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, Error> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix must be square".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, Error> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|x| C64::new(*x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, c: C64) -> Self {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// `self + c·I`.
    pub fn shift(&self, c: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] += c;
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.clone();
        m.axpy_c(ONE, other);
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = self.clone();
        m.axpy_c(-ONE, other);
        m
    }

    /// `self += c·other`.
    pub fn axpy_c(&mut self, c: C64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * x[j]).sum()).collect()
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, k: u32) -> Self {
        let mut result = Self::identity(self.n);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        spectral_norm(self)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == ZERO))
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }

    pub fn inverse(&self) -> Result<Self, Error> {
        lu_solve(self, &Self::identity(self.n))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl QuadValue for CMatrix {
    fn zero_like(&self) -> Self {
        Self::zeros(self.n)
    }
    fn axpy(&mut self, c: f64, other: &Self) {
        self.axpy_c(C64::new(c, 0.0), other);
    }
    fn norm(&self) -> f64 {
        self.frobenius()
    }
}

/// Partial-pivot LU factors of a square matrix.
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    piv: Vec<usize>,
}

impl Lu {
    pub fn new(a: &CMatrix) -> Result<Self, Error> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let tiny = 1e-300_f64.max(a.max_abs() * f64::EPSILON * 1e-3);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| lu[x * n + k].norm().total_cmp(&lu[y * n + k].norm()))
                .unwrap_or(k);
            if lu[p * n + k].norm() <= tiny {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / d;
                lu[i * n + k] = l;
                if l != ZERO {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= l * u;
                    }
                }
            }
        }
        Ok(Lu { n, lu, piv })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: C64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: C64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for j in 0..n {
            let col: Vec<C64> = (0..n).map(|i| b[(i, j)]).collect();
            for (i, v) in self.solve_vec(&col).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// `A⁻¹B` by partial-pivot LU with one step of iterative refinement.
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, Error> {
    let lu = Lu::new(a)?;
    let mut x = lu.solve(b);
    let r = b.sub(&a.mul(&x));
    x = x.add(&lu.solve(&r));
    if !x.data.iter().all(|z| z.is_finite()) {
        return Err(Error::Singular("solution is not finite".into()));
    }
    Ok(x)
}

/// `(zI + A)⁻¹`.
pub fn resolvent(a: &CMatrix, z: C64) -> Result<CMatrix, Error> {
    lu_solve(&a.shift(z), &CMatrix::identity(a.n))
        .map_err(|e| Error::Singular(format!("zI + A is singular at z = {z}: {e}")))
}

/// Spectral norm by power iteration on `M*M` from a fixed random start.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let n = m.n;
    if n == 0 {
        return 0.0;
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mh = m.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eca_1c00);
    let mut x: Vec<C64> = (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let mut est = 0.0;
    for _ in 0..2000 {
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x.iter_mut().for_each(|z| *z /= nx);
        let y = m.mul_vec(&x);
        let new = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = mh.mul_vec(&y);
        if (new - est).abs() <= 1e-15 * new {
            est = new;
            break;
        }
        est = new;
    }
    est
}

/// `e^{-tA}` by scaling and squaring with the degree 13 Padé approximant.
pub fn expm(a: &CMatrix, t: f64) -> CMatrix {
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371_920_351_148_152;
    let n = a.n;
    let m = a.scale(C64::new(-t, 0.0));
    let norm = m.norm1();
    if norm == 0.0 {
        return CMatrix::identity(n);
    }
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let m = m.scale(C64::new(2f64.powi(-squarings), 0.0));
    let id = CMatrix::identity(n);
    let m2 = m.mul(&m);
    let m4 = m2.mul(&m2);
    let m6 = m4.mul(&m2);
    let c = |k: usize| C64::new(B[k], 0.0);
    let lin = |terms: &[(usize, &CMatrix)]| {
        let mut acc = CMatrix::zeros(n);
        for (k, mat) in terms {
            acc.axpy_c(c(*k), mat);
        }
        acc
    };
    let u_inner = m6.mul(&lin(&[(13, &m6), (11, &m4), (9, &m2)]));
    let u = m.mul(&u_inner.add(&lin(&[(7, &m6), (5, &m4), (3, &m2), (1, &id)])));
    let v_inner = m6.mul(&lin(&[(12, &m6), (10, &m4), (8, &m2)]));
    let v = v_inner.add(&lin(&[(6, &m6), (4, &m4), (2, &m2), (0, &id)]));
    let mut r = lu_solve(&v.sub(&u), &v.add(&u)).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..squarings {
        r = r.mul(&r);
    }
    r
}

/// Packed upper triangular storage, row by row.
pub fn tri_pack(t: &CMatrix) -> Vec<C64> {
    let n = t.n;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(t[(i, j)]);
        }
    }
    out
}

pub fn tri_unpack(n: usize, p: &[C64]) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = p[k];
            k += 1;
        }
    }
    m
}

/// `(aT + bI)⁻¹` for upper triangular `T`, packed.
pub fn tri_shifted_inverse(t: &CMatrix, a: C64, b: C64) -> Vec<C64> {
    let n = t.n;
    let idx = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;
    let mut x = vec![ZERO; n * (n + 1) / 2];
    let d: Vec<C64> = (0..n).map(|i| (a * t[(i, i)] + b).inv()).collect();
    for j in 0..n {
        x[idx(j, j)] = d[j];
        for i in (0..j).rev() {
            let mut s = ZERO;
            for k in i + 1..=j {
                s += t[(i, k)] * x[idx(k, j)];
            }
            x[idx(i, j)] = -a * s * d[i];
        }
    }
    x
}

/// Product of two packed upper triangular matrices.
pub fn tri_mul(n: usize, x: &[C64], y: &[C64]) -> Vec<C64> {
    let idx = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;
    let mut out = vec![ZERO; x.len()];
    for i in 0..n {
        for j in i..n {
            let mut s = ZERO;
            for k in i..=j {
                s += x[idx(i, k)] * y[idx(k, j)];
            }
            out[idx(i, j)] = s;
        }
    }
    out
}

/// Integer power of a packed upper triangular matrix.
pub fn tri_powi(n: usize, x: &[C64], p: u32) -> Vec<C64> {
    let mut out = x.to_vec();
    for _ in 1..p {
        out = tri_mul(n, &out, x);
    }
    out
}

/// Upper triangular eigenvector matrix of an upper triangular `T`, columns
/// normalised, or `None` when `T` is defective.
fn tri_eigenvectors(t: &CMatrix) -> Option<CMatrix> {
    let n = t.n;
    let scale = t.max_abs().max(1e-300);
    let mut w = CMatrix::zeros(n);
    for k in 0..n {
        let lk = t[(k, k)];
        w[(k, k)] = ONE;
        for i in (0..k).rev() {
            let s: C64 = (i + 1..=k).map(|j| t[(i, j)] * w[(j, k)]).sum();
            let gap = t[(i, i)] - lk;
            if gap.norm() <= 1e-13 * scale {
                if s.norm() <= 1e-13 * scale {
                    w[(i, k)] = ZERO;
                    continue;
                }
                return None;
            }
            w[(i, k)] = -s / gap;
        }
        let nk = (0..=k).map(|i| w[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..=k {
            w[(i, k)] /= nk;
        }
    }
    Some(w)
}

/// Inverse of an upper triangular matrix.
fn tri_inverse(t: &CMatrix) -> CMatrix {
    tri_unpack(t.n, &tri_shifted_inverse(t, ONE, ZERO))
}

#[derive(Clone, Debug)]
struct Eigen {
    /// Eigenvectors of `T` (upper triangular) and their inverse.
    w: CMatrix,
    w_inv: CMatrix,
}

/// A matrix together with its spectral data and sectoriality constants.
#[derive(Debug)]
pub struct SectorialOp {
    pub a: CMatrix,
    /// Schur factors `A = Q T Q*`.
    pub q: CMatrix,
    pub t: CMatrix,
    pub eigvals: Vec<C64>,
    /// `cond₂` of the normalised eigenvector matrix; infinite when defective.
    pub eig_condition: f64,
    /// `max |arg λ|` over the spectrum.
    pub theta_est: f64,
    eigen: Option<Eigen>,
    m_cache: Mutex<Vec<(f64, f64)>>,
}

impl Clone for SectorialOp {
    fn clone(&self) -> Self {
        SectorialOp {
            a: self.a.clone(),
            q: self.q.clone(),
            t: self.t.clone(),
            eigvals: self.eigvals.clone(),
            eig_condition: self.eig_condition,
            theta_est: self.theta_est,
            eigen: self.eigen.clone(),
            m_cache: Mutex::new(self.m_cache.lock().map(|c| c.clone()).unwrap_or_default()),
        }
    }
}

/// Eigenvalue-condition ceiling for the eigendecomposition paths.
pub const EIG_COND_MAX: f64 = 1e8;

impl SectorialOp {
    pub fn new(a: CMatrix) -> Result<Self, Error> {
        if a.n == 0 {
            return Err(Error::Domain("empty matrix".into()));
        }
        let (q, t) = if a.is_upper_triangular() {
            (CMatrix::identity(a.n), a.clone())
        } else {
            let schur = nalgebra::linalg::Schur::try_new(a.to_nalgebra(), 1e-15, 10_000)
                .ok_or_else(|| Error::Unsupported("Schur iteration did not converge".into()))?;
            let (q, t) = schur.unpack();
            let mut t = CMatrix::from_nalgebra(&t);
            for i in 0..t.n {
                for j in 0..i {
                    t[(i, j)] = ZERO;
                }
            }
            (CMatrix::from_nalgebra(&q), t)
        };
        Ok(Self::from_schur(a, q, t))
    }

    fn from_schur(a: CMatrix, q: CMatrix, t: CMatrix) -> Self {
        let eigvals = t.diag();
        let theta_est = eigvals
            .iter()
            .map(|l| if l.norm() == 0.0 { 0.0 } else { l.arg().abs() })
            .fold(0.0, f64::max);
        let eigen = tri_eigenvectors(&t).map(|w| {
            let w_inv = tri_inverse(&w);
            Eigen { w, w_inv }
        });
        let eig_condition = match &eigen {
            Some(e) => e.w.norm2() * e.w_inv.norm2(),
            None => f64::INFINITY,
        };
        SectorialOp {
            a,
            q,
            t,
            eigvals,
            eig_condition,
            theta_est,
            eigen,
            m_cache: Mutex::new(Vec::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.a.n
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigvals.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.eig_condition < EIG_COND_MAX
    }

    /// `Q X Q*`.
    pub fn from_schur_basis(&self, x: &CMatrix) -> CMatrix {
        self.q.mul(x).mul(&self.q.adjoint())
    }

    /// Unpack a packed triangular matrix and return to the original basis.
    pub fn from_packed(&self, p: &[C64]) -> CMatrix {
        self.from_schur_basis(&tri_unpack(self.n(), p))
    }

    /// `g(T)` for diagonalizable `T`, packed.
    pub fn tri_function(&self, g: &dyn Fn(C64) -> C64) -> Result<Vec<C64>, Error> {
        let e = self
            .eigen
            .as_ref()
            .filter(|_| self.is_diagonalizable())
            .ok_or_else(|| Error::Oracle(format!("eigenbasis condition {:.3e} too large", self.eig_condition)))?;
        let n = self.n();
        let mut wd = e.w.clone();
        for j in 0..n {
            let gj = g(self.eigvals[j]);
            for i in 0..=j {
                wd[(i, j)] *= gj;
            }
        }
        Ok(tri_pack(&wd.mul(&e.w_inv)))
    }

    /// `V diag(g(λ)) V⁻¹`.
    pub fn eig_function(&self, g: &dyn Fn(C64) -> C64) -> Result<CMatrix, Error> {
        Ok(self.from_packed(&self.tri_function(g)?))
    }

    /// The shifted operator `A + εI`, reusing the Schur basis.
    pub fn shifted(&self, eps: C64) -> Self {
        Self::from_schur(self.a.shift(eps), self.q.clone(), self.t.shift(eps))
    }

    /// `‖z(z+A)⁻¹‖`.
    pub fn sector_ratio(&self, z: C64) -> f64 {
        let x = tri_unpack(self.n(), &tri_shifted_inverse(&self.t, ONE, z));
        (x.norm2() * z.norm()).max(0.0)
    }

    /// `M_ψ(A)` estimated on the boundary rays of `Σ_{π-ψ}`.
    ///
    /// The map `z ↦ z(z+A)⁻¹` is holomorphic on the sector and tends to `I`
    /// at infinity, so its norm is largest on the boundary. The rays are
    /// sampled on a logarithmic grid over `[1e-6·ρ(A), 1e6·ρ(A)]` and the
    /// best sample is refined by golden section search. The result is a lower
    /// bound for the true supremum; callers needing an upper bound multiply
    /// by [`M_SAFETY`].
    pub fn sector_constant(&self, psi: f64) -> Result<f64, Error> {
        if !(psi > 0.0 && psi <= PI) {
            return Err(Error::Domain(format!("sector angle must lie in (0, pi], got {psi}")));
        }
        if self.theta_est >= psi {
            return Err(Error::Precondition(format!(
                "spectrum reaches angle {:.6} which is not below {psi:.6}",
                self.theta_est
            )));
        }
        if self.eigvals.iter().any(|l| l.norm() == 0.0) {
            return Err(Error::Precondition("matrix is not injective".into()));
        }
        if let Ok(cache) = self.m_cache.lock() {
            if let Some((_, m)) = cache.iter().find(|(p, _)| *p == psi) {
                return Ok(*m);
            }
        }
        let rho = self.spectral_radius();
        let lo = (1e-6 * rho).ln();
        let hi = (1e6 * rho).ln();
        let pts = 481;
        let grid: Vec<f64> = (0..pts).map(|k| lo + (hi - lo) * k as f64 / (pts - 1) as f64).collect();
        let mut best = 1.0f64;
        for sign in [1.0, -1.0] {
            let dir = C64::from_polar(1.0, sign * (PI - psi));
            let h = |u: f64| self.sector_ratio(dir * u.exp());
            best = best.max(crate::normcalc::grid_sup(&h, &grid).value);
        }
        if let Ok(mut cache) = self.m_cache.lock() {
            cache.push((psi, best));
        }
        Ok(best)
    }

    /// `M_A = M_{π/2}(A)`.
    pub fn m_a(&self) -> Result<f64, Error> {
        self.sector_constant(FRAC_PI_2)
    }

    /// `M_ψ(A)` with the safety factor applied.
    pub fn m_upper(&self, psi: f64) -> Result<f64, Error> {
        Ok(M_SAFETY * self.sector_constant(psi)?)
    }

    /// The cached `(ψ, M_ψ)` pairs.
    pub fn cached_constants(&self) -> Vec<(f64, f64)> {
        let mut v = self.m_cache.lock().map(|c| c.clone()).unwrap_or_default();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    fn check_branch(&self) -> Result<(), Error> {
        if self
            .eigvals
            .iter()
            .any(|l| l.norm() == 0.0 || (l.im.abs() <= 1e-14 * l.norm() && l.re < 0.0))
        {
            return Err(Error::Domain("spectrum touches (-inf, 0]".into()));
        }
        Ok(())
    }

    /// `T^γ`, packed; eigen path when available, Stieltjes quadrature otherwise.
    fn tri_power(&self, gamma: f64) -> Result<Vec<C64>, Error> {
        self.check_branch()?;
        if self.is_diagonalizable() {
            return self.tri_function(&|l| l.powf(gamma));
        }
        self.tri_power_stieltjes(gamma)
    }

    fn tri_power_stieltjes(&self, gamma: f64) -> Result<Vec<C64>, Error> {
        let n = self.n();
        let whole = gamma.floor() as u32;
        let frac = gamma - gamma.floor();
        let t_packed = tri_pack(&self.t);
        let mut out = if whole == 0 { tri_pack(&CMatrix::identity(n)) } else { tri_powi(n, &t_packed, whole) };
        if frac > 0.0 {
            out = tri_mul(n, &out, &stieltjes_power(&self.t, frac)?);
        }
        Ok(out)
    }

    /// `A^γ`.
    pub fn frac_power(&self, gamma: f64) -> Result<CMatrix, Error> {
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!("power must be positive, got {gamma}")));
        }
        Ok(self.from_packed(&self.tri_power(gamma)?))
    }

    /// `A^γ` as a sectorial operator sharing the Schur basis of `A`.
    pub fn power_op(&self, gamma: f64) -> Result<SectorialOp, Error> {
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!("power must be positive, got {gamma}")));
        }
        let t = tri_unpack(self.n(), &self.tri_power(gamma)?);
        let a = self.from_schur_basis(&t);
        Ok(Self::from_schur(a, self.q.clone(), t))
    }

    /// `(A + z)^{-γ}` by the eigendecomposition.
    pub fn resolvent_frac(&self, z: C64, gamma: f64) -> Result<CMatrix, Error> {
        self.shifted(z).check_branch()?;
        self.eig_function(&|l| (l + z).powf(-gamma))
    }

    /// `(A + z)^{-γ}` by the Stieltjes integral
    /// `(sin πα/π) ∫₀^∞ r^{-α} (r + A + z)⁻¹ dr`, `α = γ - ⌊γ⌋`, times the
    /// integer power of the resolvent.
    pub fn resolvent_frac_stieltjes(&self, z: C64, gamma: f64) -> Result<CMatrix, Error> {
        let b = self.shifted(z);
        b.check_branch()?;
        let n = self.n();
        let whole = gamma.floor() as u32;
        let frac = gamma - gamma.floor();
        let r1 = tri_shifted_inverse(&b.t, ONE, ZERO);
        let mut out = if whole == 0 { tri_pack(&CMatrix::identity(n)) } else { tri_powi(n, &r1, whole) };
        if frac > 0.0 {
            out = tri_mul(n, &out, &stieltjes_inverse_power(&b.t, frac)?);
        }
        Ok(b.from_packed(&out))
    }
}

fn stieltjes_line<F: Fn(f64) -> Vec<C64> + Sync>(f: &F, lo: f64, hi: f64, centre: f64) -> Result<Vec<C64>, Error> {
    let mut opts = LineOpts::log_radial(60.0, 1e-13, 1e-12);
    opts.lo = lo;
    opts.hi = hi;
    opts.centre = centre;
    let r = quad::line(f, &opts);
    if r.divergent || r.value.iter().any(|z| !z.is_finite()) {
        return Err(Error::Quadrature("Stieltjes integral did not settle".into()));
    }
    Ok(r.value)
}

/// `T^α`, `0 < α < 1`, packed, from
/// `T^α = (sin πα/π) ∫₀^∞ t^{α-1} T(t+T)⁻¹ dt`.
///
/// Beyond `R = ρ(T)` the identity `T(t+T)⁻¹ = T/t - T²/(t(t+T))` integrates
/// the slowly decaying leading term exactly.
fn stieltjes_power(t: &CMatrix, alpha: f64) -> Result<Vec<C64>, Error> {
    let n = t.n;
    let tp = tri_pack(t);
    let t2 = tri_mul(n, &tp, &tp);
    let big_r = t.diag().iter().map(|l| l.norm()).fold(0.0, f64::max).max(1e-300);
    let lr = big_r.ln();
    let near = |u: f64| {
        let s = u.exp();
        let mut v = tri_mul(n, &tp, &tri_shifted_inverse(t, ONE, C64::new(s, 0.0)));
        let w = s.powf(alpha);
        v.iter_mut().for_each(|z| *z *= w);
        v
    };
    let far = |u: f64| {
        let s = u.exp();
        let mut v = tri_mul(n, &t2, &tri_shifted_inverse(t, ONE, C64::new(s, 0.0)));
        let w = s.powf(alpha - 1.0);
        v.iter_mut().for_each(|z| *z *= w);
        v
    };
    let a = stieltjes_line(&near, -60.0 + lr, lr, lr)?;
    let b = stieltjes_line(&far, lr, 60.0 + lr, lr)?;
    let lead = big_r.powf(alpha - 1.0) / (1.0 - alpha);
    // below ε = R e^{-60} the integrand is t^{α-1}(I + O(t))
    let head = (lr - 60.0).exp().powf(alpha) / alpha;
    let id = tri_pack(&CMatrix::identity(n));
    let c = (PI * alpha).sin() / PI;
    Ok((0..tp.len()).map(|k| (a[k] + id[k] * head + tp[k] * lead - b[k]) * c).collect())
}

/// `T^{-α}`, `0 < α < 1`, packed, from
/// `T^{-α} = (sin πα/π) ∫₀^∞ r^{-α} (r+T)⁻¹ dr`, with
/// `(r+T)⁻¹ = 1/r - T/(r(r+T))` beyond `R = ρ(T)`.
fn stieltjes_inverse_power(t: &CMatrix, alpha: f64) -> Result<Vec<C64>, Error> {
    let n = t.n;
    let tp = tri_pack(t);
    let id = tri_pack(&CMatrix::identity(n));
    let big_r = t.diag().iter().map(|l| l.norm()).fold(0.0, f64::max).max(1e-300);
    let lr = big_r.ln();
    let near = |u: f64| {
        let r = u.exp();
        let mut v = tri_shifted_inverse(t, ONE, C64::new(r, 0.0));
        let w = r.powf(1.0 - alpha);
        v.iter_mut().for_each(|z| *z *= w);
        v
    };
    let far = |u: f64| {
        let r = u.exp();
        let mut v = tri_mul(n, &tp, &tri_shifted_inverse(t, ONE, C64::new(r, 0.0)));
        let w = r.powf(-alpha);
        v.iter_mut().for_each(|z| *z *= w);
        v
    };
    let a = stieltjes_line(&near, -60.0 + lr, lr, lr)?;
    let b = stieltjes_line(&far, lr, 60.0 + lr, lr)?;
    let lead = big_r.powf(-alpha) / alpha;
    // below ε = R e^{-60} the integrand is r^{-α}(T⁻¹ + O(r))
    let head = (lr - 60.0).exp().powf(1.0 - alpha) / (1.0 - alpha);
    let t_inv = tri_shifted_inverse(t, ONE, ZERO);
    let c = (PI * alpha).sin() / PI;
    Ok((0..tp.len()).map(|k| (a[k] + t_inv[k] * head + id[k] * lead - b[k]) * c).collect())
}

/// Safety factor applied to sampled sectoriality constants when they enter an
/// upper bound.
pub const M_SAFETY: f64 = 1.05;

/// `f(A)` by eigendecomposition, with the exact formula for a `2×2` Jordan
/// block.
pub fn eig_calc_oracle(op: &SectorialOp, f: &crate::funcat::SectorFn) -> Result<CMatrix, Error> {
    let a = &op.a;
    if a.n == 2 && a[(1, 0)] == ZERO && a[(0, 0)] == a[(1, 1)] && a[(0, 1)] != ZERO {
        let l = a[(0, 0)];
        let fl = f.try_eval(l)?;
        return CMatrix::from_rows(&[vec![fl, a[(0, 1)] * f.deriv(l)], vec![ZERO, fl]]);
    }
    for l in &op.eigvals {
        f.try_eval(*l)?;
    }
    op.eig_function(&|l| f.eval(l))
}

/// A named matrix of the fixed test suite.
#[derive(Clone, Debug)]
pub struct TestMatrix {
    pub name: String,
    pub a: CMatrix,
}

/// Normal `2×2` real matrix with spectrum `r e^{±iθ}`.
pub fn rotation_scaled(r: f64, theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_real_rows(&[&[r * c, -r * s], &[r * s, r * c]]).expect("2x2")
}

/// `8×8` upwind difference matrix `A_ii = a_i/h`, `A_{i,i-1} = -a_i/h` with
/// `a_i = 1 + i/4`, `h = 1/8`.
pub fn upwind(n: usize) -> CMatrix {
    let h = 1.0 / n as f64;
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        let a = 1.0 + i as f64 / 4.0;
        m[(i, i)] = C64::new(a / h, 0.0);
        if i > 0 {
            m[(i, i - 1)] = C64::new(-a / h, 0.0);
        }
    }
    m
}

pub fn jordan2(lambda: f64) -> CMatrix {
    CMatrix::from_real_rows(&[&[lambda, 1.0], &[0.0, lambda]]).expect("2x2")
}

/// The fixed test-matrix suite.
pub fn test_matrices() -> Vec<TestMatrix> {
    let mk = |name: &str, a: CMatrix| TestMatrix { name: name.into(), a };
    vec![
        mk("diag(1)", CMatrix::from_real_diag(&[1.0])),
        mk("diag(1,2)", CMatrix::from_real_diag(&[1.0, 2.0])),
        mk("diag(1,4)", CMatrix::from_real_diag(&[1.0, 4.0])),
        mk("diag(1,10)", CMatrix::from_real_diag(&[1.0, 10.0])),
        mk("diag(1,100)", CMatrix::from_real_diag(&[1.0, 100.0])),
        mk("identity(3)", CMatrix::identity(3)),
        mk("jordan(1)", jordan2(1.0)),
        mk("rot(2,pi/6)", rotation_scaled(2.0, PI / 6.0)),
        mk("rot(2,pi/3)", rotation_scaled(2.0, PI / 3.0)),
        mk("rot(2,2pi/3)", rotation_scaled(2.0, 2.0 * PI / 3.0)),
        mk("upwind(8)", upwind(8)),
    ]
}

/// Build a matrix from rows of `[re, im]` pairs, the JSON layout used by the
/// command line tool.
pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, Error> {
    let n = rows.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::Parse(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|[a, b]| C64::new(*a, *b)).collect()).collect();
    CMatrix::from_rows(&rows)
}

/// Parse a Matrix Market `array` or `coordinate` file with `real` or
/// `complex` entries.
pub fn matrix_from_market(text: &str) -> Result<CMatrix, Error> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() < 4 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(Error::Parse("missing %%MatrixMarket matrix header".into()));
    }
    let coordinate = match h[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(Error::Parse(format!("unknown storage '{other}'"))),
    };
    let complex = match h[3].as_str() {
        "real" | "integer" => false,
        "complex" => true,
        other => return Err(Error::Parse(format!("unsupported field '{other}'"))),
    };
    if h.get(4).is_some_and(|s| s != "general") {
        return Err(Error::Parse("only general symmetry is supported".into()));
    }
    let mut body = lines.filter(|l| !l.starts_with('%'));
    let size: Vec<usize> = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size entry '{t}'"))))
        .collect::<Result<_, _>>()?;
    if size.len() < 2 || size[0] != size[1] {
        return Err(Error::Parse("matrix must be square".into()));
    }
    let n = size[0];
    if n == 0 || n > MAX_DIM {
        return Err(Error::Parse(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    let num = |t: &str| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{t}'")));
    let mut m = CMatrix::zeros(n);
    if coordinate {
        let nnz = *size.get(2).ok_or_else(|| Error::Parse("coordinate format needs an entry count".into()))?;
        for _ in 0..nnz {
            let line = body.next().ok_or_else(|| Error::Parse("too few entries".into()))?;
            let t: Vec<&str> = line.split_whitespace().collect();
            let want = if complex { 4 } else { 3 };
            if t.len() < want {
                return Err(Error::Parse(format!("short entry line '{line}'")));
            }
            let i: usize = t[0].parse().map_err(|_| Error::Parse(format!("bad index '{}'", t[0])))?;
            let j: usize = t[1].parse().map_err(|_| Error::Parse(format!("bad index '{}'", t[1])))?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::Parse(format!("index ({i}, {j}) out of range")));
            }
            let im = if complex { num(t[3])? } else { 0.0 };
            m[(i - 1, j - 1)] = C64::new(num(t[2])?, im);
        }
    } else {
        // column-major
        for j in 0..n {
            for i in 0..n {
                let line = body.next().ok_or_else(|| Error::Parse("too few entries".into()))?;
                let t: Vec<&str> = line.split_whitespace().collect();
                let im = if complex { num(t.get(1).copied().unwrap_or("x"))? } else { 0.0 };
                m[(i, j)] = C64::new(num(t[0])?, im);
            }
        }
    }
    CMatrix::new(n, m.data)
}
