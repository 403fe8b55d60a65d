//! Error-function kernel.
//!
//! Everything in the entropy reduces to the distribution function
//!
//! ```text
//! F(x) = 1/(2√π) ∫_{-∞}^{x} exp(-s²/4) ds = (1 + erf(x/2)) / 2,
//! ```
//!
//! i.e. the CDF of a centred normal law with variance 2, together with its
//! density and the logarithm of differences `F(x) - F(y)`. The latter is the
//! delicate part: boundaries routinely sit deep in a Gaussian tail, where the
//! difference underflows long before its logarithm does.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// `ln(2√π)`, the normalization of [`cdf_prime`].
pub const LN_TWO_SQRT_PI: f64 = 1.265_512_123_484_645_4;

/// `1/(2√π)`, the peak value of [`cdf_prime`].
pub const INV_TWO_SQRT_PI: f64 = 0.282_094_791_773_878_14;

/// Beyond this argument `erfc` is replaced by its asymptotic series.
/// `erfc(26) ≈ 5.7e-296` is still a normal double.
const ERFC_ASYMPTOTIC_FROM: f64 = 26.0;

/// `F(x)`. Total on the extended reals; NaN propagates.
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-0.5 * x)
}

/// `F'(x) = exp(-x²/4) / (2√π)`.
pub fn cdf_prime(x: f64) -> f64 {
    INV_TWO_SQRT_PI * (-0.25 * x * x).exp()
}

/// `ln F'(x)`; finite for every finite `x`.
pub fn ln_cdf_prime(x: f64) -> f64 {
    -0.25 * x * x - LN_TWO_SQRT_PI
}

/// `ln erfc(z)` for `z >= 0`, accurate far past the underflow of `erfc`.
fn ln_erfc_nonneg(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z < ERFC_ASYMPTOTIC_FROM {
        return libm::erfc(z).ln();
    }
    // erfc(z) = exp(-z²)/(z√π) · Σ (-1)^k (2k-1)!! / (2z²)^k
    let inv = 1.0 / (2.0 * z * z);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..10 {
        term *= -((2 * k - 1) as f64) * inv;
        sum += term;
    }
    // Split z² so the leading exponent keeps full relative precision.
    let hi = z * z;
    let lo = z.mul_add(z, -hi);
    -hi - lo - (z * PI.sqrt()).ln() + sum.ln()
}

/// `ln(F(x) - F(y))` for `x > y`, without cancellation.
///
/// Arguments straddling zero subtract `erf` values of opposite sign, which
/// is exact enough as is. Same-sign arguments are mirrored onto the right
/// tail and written as `erfc(y/2) - erfc(x/2)` in log space; when the two
/// tails are within a factor `e^{1/2}` of each other the difference is
/// integrated directly instead.
pub fn log_cdf_diff(x: f64, y: f64) -> Result<f64> {
    if x.is_nan() || y.is_nan() {
        return Ok(f64::NAN);
    }
    if x <= y {
        return Err(Error::Domain { x, y });
    }
    Ok(log_cdf_diff_ordered(x, y))
}

pub(crate) fn log_cdf_diff_ordered(x: f64, y: f64) -> f64 {
    debug_assert!(x > y);
    if y < 0.0 && x > 0.0 {
        return (0.5 * (libm::erf(0.5 * x) - libm::erf(0.5 * y))).ln();
    }
    // Mirror the left tail: F(x) - F(y) = F(-y) - F(-x).
    let (hi, lo) = if y >= 0.0 { (x, y) } else { (-y, -x) };
    let ln_tail_lo = ln_erfc_nonneg(0.5 * lo) - LN_2;
    if hi == f64::INFINITY {
        return ln_tail_lo;
    }
    let ln_ratio = ln_erfc_nonneg(0.5 * hi) - ln_erfc_nonneg(0.5 * lo);
    if ln_ratio < -0.5 {
        ln_tail_lo + (-ln_ratio.exp_m1()).ln()
    } else {
        ln_gaussian_integral(lo, hi)
    }
}

/// `ln ∫_lo^hi F'(s) ds` for `0 <= lo < hi` with a slowly varying integrand.
fn ln_gaussian_integral(lo: f64, hi: f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let sum: f64 = gauss_legendre()
        .iter()
        .map(|&(node, weight)| {
            let s = mid + half * node;
            weight * (-0.25 * (s - lo) * (s + lo)).exp()
        })
        .sum();
    -0.25 * lo * lo - LN_TWO_SQRT_PI + (half * sum).ln()
}

const GL_POINTS: usize = 20;

fn gauss_legendre() -> &'static [(f64, f64); GL_POINTS] {
    static RULE: OnceLock<[(f64, f64); GL_POINTS]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut rule = [(0.0, 0.0); GL_POINTS];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// `ln F(x)`.
pub fn ln_cdf(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    log_cdf_diff_ordered(x, f64::NEG_INFINITY)
}

/// Solves `ln F(x) = ln_p` for `ln_p <= ln(1/2)`; the root is `<= 0`.
///
/// `ln F` is increasing and concave, so after the first Newton step the
/// iterates approach the root monotonically from the left. The bracket only
/// guards against round-off near convergence.
pub(crate) fn cdf_inverse_ln(ln_p: f64) -> f64 {
    debug_assert!(ln_p <= -LN_2 + 1e-15);
    if ln_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, 0.0_f64);
    // Leading-order tail inversion: ln F(x) ≈ -x²/4.
    let mut x = if ln_p < -2.0 { -2.0 * (-ln_p).sqrt() } else { 0.0 };
    for _ in 0..200 {
        let ln_f = ln_cdf(x);
        let g = ln_f - ln_p;
        if g == 0.0 {
            return x;
        }
        if g > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let slope = (ln_cdf_prime(x) - ln_f).exp();
        let mut next = x - g / slope;
        if !(next > lo && next < hi) {
            next = if lo.is_finite() {
                0.5 * (lo + hi)
            } else {
                2.0 * hi.min(-1.0)
            };
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// `F⁻¹(p)` for `0 < p < 1`.
pub fn cdf_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    Ok(if p <= 0.5 {
        cdf_inverse_ln(p.ln())
    } else {
        -cdf_inverse_ln((1.0 - p).ln())
    })
}
