// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical functional calculi for sectorial matrices.
//!
//! The crate evaluates the Hardy–Sobolev type norms `𝒱ₛ`, `𝒟ₛ`, `H¹(Σ_ψ)`
//! and friends by deterministic adaptive quadrature, reproduces functions
//! from their derivatives, and computes `f(A)` for dense complex matrices
//! through the `𝒟`-calculus, the `ℋ`-calculus (half-plane lift and arccot
//! forms) and the Hille–Phillips calculus. [`verify`] turns the explicit
//! operator-norm estimates of the theory into executable checks.
//!
//! ```
//! use seccalc::{funcat, normcalc::{self, QuadConfig}};
//!
//! let r1 = funcat::resolvent(1.0.into()).unwrap();
//! let n = normcalc::ds_norm(&r1, 1.0, &QuadConfig::default()).unwrap();
//! assert!((n.value - std::f64::consts::PI * 2f64.ln()).abs() < 1e-7);
//! ```

pub mod fcalc;
pub mod funcat;
pub mod matops;
pub mod normcalc;
pub mod quad;
pub mod reprkernel;
pub mod special;
pub mod verify;

pub use num_complex::Complex64 as C64;

/// Errors shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("quadrature budget exhausted: {0}")]
    Quadrature(String),
    #[error("oracle unavailable: {0}")]
    Oracle(String),
}

/// The guide chapters, compiled as doc-tests so the snippets stay in sync.
pub mod guide {
    #[doc = include_str!("../../../book/src/intro.md")]
    pub mod intro {}
    #[doc = include_str!("../../../book/src/functions.md")]
    pub mod functions {}
    #[doc = include_str!("../../../book/src/norms.md")]
    pub mod norms {}
    #[doc = include_str!("../../../book/src/reproducing.md")]
    pub mod reproducing {}
    #[doc = include_str!("../../../book/src/calculus.md")]
    pub mod calculus {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
