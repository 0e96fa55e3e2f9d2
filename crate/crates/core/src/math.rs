//! Scalar and complex helpers routed through `libm` so the crate stays
//! `no_std` and bit-identical across hosts.

use num_complex::Complex64;

pub(crate) use libm::{cos, exp, fabs as abs, log as ln, pow, sin, sqrt, tan, tanh};

/// Natural log of |Γ(x)| (sign discarded; callers only use x > 0).
pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// x^n for small integer n by repeated multiplication.
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    let mut r = 1.0;
    let mut b = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            r *= b;
        }
        b *= b;
        e >>= 1;
    }
    r
}

pub(crate) fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}

/// Complex hyperbolic tangent that saturates instead of overflowing for
/// large |Re z| (tanh(x+iy) = (tanh x + i tan y)/(1 + i tanh x tan y)).
pub(crate) fn ctanh(z: Complex64) -> Complex64 {
    let tx = tanh(z.re);
    let ty = tan(z.im);
    Complex64::new(tx, ty) / Complex64::new(1.0, tx * ty)
}

pub(crate) fn is_finite(x: f64) -> bool {
    x - x == 0.0
}
