//! Standard normal density and distribution function.
//!
//! The CDF is evaluated through `erfc` from `libm` (a port of the FreeBSD
//! msun routines, accurate to about one ulp), written as
//! `N(x) = erfc(-x / sqrt(2)) / 2`. Using `erfc` rather than `1 - erf` keeps
//! full relative accuracy deep in the lower tail, which matters for far
//! out-of-the-money prices in the margin scans.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// 1 / sqrt(2 pi)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[allow(dead_code)]
pub(crate) fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        // N(1) and N(-1), 17 digits from mpmath
        assert!((cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        // deep tail keeps relative accuracy: N(-8) = 6.22096057427178e-16
        assert!((cdf(-8.0) / 6.220_960_574_271_78e-16 - 1.0).abs() < 1e-12);
        assert!((INV_SQRT_2PI * sqrt_2pi() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetry() {
        for i in 0..100 {
            let x = -5.0 + 0.1 * i as f64;
            assert!((cdf(x) + cdf(-x) - 1.0).abs() < 1e-15);
            assert_eq!(pdf(x), pdf(-x));
        }
    }
}
