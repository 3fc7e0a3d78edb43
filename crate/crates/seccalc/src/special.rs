// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Constants and the Gamma/Beta family, thin wrappers over `statrs`.

/// Catalan's constant `G = Σ (-1)^k / (2k+1)^2`.
pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_1;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn beta_half_half_is_pi() {
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-13);
    }

    #[test]
    fn beta_quarter_half() {
        // reference value from a 20-digit evaluation
        assert!((beta(0.25, 0.5) - 5.244_115_108_584_24).abs() < 1e-11);
    }

    #[test]
    fn catalan_partial_sums() {
        let s: f64 = (0..200_000)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / ((2 * k + 1) as f64).powi(2))
            .sum();
        assert!((s - CATALAN).abs() < 1e-10);
    }

    #[test]
    fn binomial_row() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(4, 5), 0.0);
    }
}
