//! Stationary solution of the two-sided chain game and its kernel weights.
//!
//! The stationary generating function is 𝔟(z) = √(εB)·(1 − (zw + v/z))^{1/2}
//! with B = p·p₁ + (1−p)·q₁, w + v = 1. Expanding the binomial double series
//! and collecting powers of z gives
//!
//! ```text
//! φ^{+j} = √(εB) Σ_ℓ C(1/2, 2ℓ+j)(−1)^{2ℓ+j} C(2ℓ+j, ℓ+j) w^{ℓ+j} v^ℓ
//! φ^{−j} = √(εB) Σ_ℓ C(1/2, 2ℓ+j)(−1)^{2ℓ+j} C(2ℓ+j, ℓ)   w^ℓ   v^{ℓ+j}
//! ```
//!
//! so negative indices are the w ↔ v exchange of positive ones. (A circulated
//! closed form for φ^{−j} built from cosh ∘ tanh⁻¹ breaks that exchange
//! symmetry and is not used; the series is confirmed by contour extraction
//! and by the convolution identity Σ_k φ^k φ^{j−k} = εB(δ_{j0} − wδ_{j1} −
//! vδ_{j,−1}).) The series terms decay like (4wv)^ℓ, so at the symmetric
//! boundary 4wv = 1 the coefficients are instead evaluated through the
//! algebraically identical ₂F₁ reduction, whose z = 1 value is the Gauss
//! closed form.
//!
//! For the deterministic two-sided chain (p₁ = q₁ = 1) the equilibrium
//! generator satisfies Q² = I − pB⁺ − (1−p)B⁻ with shift matrices B^±, and
//! exp(Qt) entries reduce to sums of one-sided kernel entries weighted by
//! binomial (p, 1−p) factors — see [`twosided_kernel_weight`].

use alloc::vec;
use alloc::vec::Vec;

use crate::catalan::Provenance;
use crate::math;
use crate::params::TwoSidedParams;
use crate::{Error, Result};

/// Stationary coefficients φ^j for j ∈ −K..K.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedStationary {
    values: Vec<f64>,
    trunc: usize,
    epsilon_b: f64,
    w: f64,
    v: f64,
    provenance: Provenance,
}

impl TwoSidedStationary {
    pub fn from_values(values: Vec<f64>, epsilon_b: f64, w: f64, v: f64, provenance: Provenance) -> Self {
        let trunc = (values.len() - 1) / 2;
        Self { values, trunc, epsilon_b, w, v, provenance }
    }

    pub fn coeff(&self, j: i64) -> f64 {
        if j.unsigned_abs() as usize > self.trunc {
            return 0.0;
        }
        self.values[(j + self.trunc as i64) as usize]
    }

    /// Values ordered j = −K..K.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn truncation(&self) -> usize {
        self.trunc
    }

    pub fn min_index(&self) -> i64 {
        -(self.trunc as i64)
    }

    /// ε·B prefactor squared under the root, and the (w, v) shares.
    pub fn epsilon_b(&self) -> f64 {
        self.epsilon_b
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Truncated Σ_j φ^j (the infinite sum vanishes).
    pub fn tail_sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Signed binomial s_j = (−1)^j C(1/2, j): s_0 = 1, s_{j+1} = s_j (2j−1)/(2j+2).
fn signed_half_binomial(j: usize) -> f64 {
    let mut s = 1.0;
    for i in 0..j {
        s *= (2.0 * i as f64 - 1.0) / (2.0 * i as f64 + 2.0);
    }
    s
}

/// One stationary coefficient from the double series (index sign handled by
/// swapping the (w, v) roles). `wv4 = 4wv` must satisfy wv ≤ 1/4.
fn series_coeff(epsilon_b: f64, w_near: f64, v_far: f64, j: usize) -> Result<f64> {
    // term_0 = s_j w^j; ratio_ℓ = (2i−1)(2i+1) wv / (4(ℓ+1)(ℓ+j+1)), i = 2ℓ+j
    let wv = w_near * v_far;
    let mut term = signed_half_binomial(j) * math::powi(w_near, j as i32);
    let mut acc = term;
    let jf = j as f64;
    let mut l = 0usize;
    loop {
        let i = 2.0 * l as f64 + jf;
        let ratio = (2.0 * i - 1.0) * (2.0 * i + 1.0) * wv
            / (4.0 * (l as f64 + 1.0) * (l as f64 + jf + 1.0));
        term *= ratio;
        acc += term;
        l += 1;
        if math::abs(term) <= 1e-16 * math::abs(acc) && l > j {
            return Ok(math::sqrt(epsilon_b) * acc);
        }
        if l > 2_000_000 {
            return Err(Error::Accuracy { wanted: 1e-14, achieved: math::abs(term / acc) });
        }
    }
}

/// Same coefficient through the hypergeometric reduction
/// φ^j = √(εB)(−1)^j w^j C(1/2,j) ₂F₁(−1/4 + j/2, 1/4 + j/2; 1 + j; 4wv),
/// exact at the 4wv = 1 boundary via the Gauss summation.
fn hyp_coeff(epsilon_b: f64, w_near: f64, v_far: f64, j: usize) -> Result<f64> {
    let z = (4.0 * w_near * v_far).min(1.0);
    let jf = j as f64;
    let f = hyp2f1(-0.25 + jf / 2.0, 0.25 + jf / 2.0, 1.0 + jf, z)?;
    Ok(math::sqrt(epsilon_b) * signed_half_binomial(j) * math::powi(w_near, j as i32) * f)
}

fn coeff_dispatch(epsilon_b: f64, w_near: f64, v_far: f64, j: usize) -> Result<f64> {
    if 4.0 * w_near * v_far > 0.999 {
        hyp_coeff(epsilon_b, w_near, v_far, j)
    } else {
        series_coeff(epsilon_b, w_near, v_far, j)
    }
}

/// Stationary coefficients of the two-sided game on the window −K..K.
pub fn stationary_twosided_coeffs(params: &TwoSidedParams, trunc: usize) -> Result<TwoSidedStationary> {
    params.validate()?;
    if trunc < 2 {
        return Err(Error::InvalidParam { name: "trunc", reason: "must be >= 2" });
    }
    let (w, v) = (params.w(), params.v());
    if w * v > 0.25 + 1e-12 {
        return Err(Error::Domain("wv must not exceed 1/4"));
    }
    let epsilon_b = params.epsilon * params.b();
    let mut values = vec![0.0; 2 * trunc + 1];
    for j in 0..=trunc {
        let plus = coeff_dispatch(epsilon_b, w, v, j)?;
        values[trunc + j] = plus;
        if j > 0 {
            values[trunc - j] = coeff_dispatch(epsilon_b, v, w, j)?;
        }
    }
    Ok(TwoSidedStationary { values, trunc, epsilon_b, w, v, provenance: Provenance::ClosedForm })
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for z ∈ [0, 1]: partial
/// sums of the rising-factorial series, and the Gauss closed form
/// Γ(c)Γ(c−a−b)/(Γ(c−a)Γ(c−b)) at z = 1 (requires c − a − b > 0).
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if c <= 0.0 && c == libm::floor(c) {
        return Err(Error::Domain("2F1 undefined at nonpositive integer c"));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain("2F1 argument restricted to [0, 1]"));
    }
    if z == 1.0 {
        if !(c - a - b > 0.0) {
            return Err(Error::Domain("2F1 at z = 1 needs c - a - b > 0"));
        }
        let (l1, s1) = libm::lgamma_r(c);
        let (l2, s2) = libm::lgamma_r(c - a - b);
        let (l3, s3) = libm::lgamma_r(c - a);
        let (l4, s4) = libm::lgamma_r(c - b);
        let sign = (s1 * s2 * s3 * s4) as f64;
        return Ok(sign * math::exp(l1 + l2 - l3 - l4));
    }
    let mut term = 1.0;
    let mut acc = 1.0;
    let mut n = 0.0f64;
    loop {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
        acc += term;
        n += 1.0;
        if math::abs(term) <= 1e-15 * math::abs(acc) {
            return Ok(acc);
        }
        if n > 2e6 {
            return Err(Error::Accuracy { wanted: 1e-14, achieved: math::abs(term / acc) });
        }
    }
}

/// exp(Qt) entry at a given diagonal offset for the deterministic two-sided
/// chain (p₁ = q₁ = 1, ε = σ = 1), assembled from one-sided kernel entries
/// e_k(t) and binomial weights:
///
/// ```text
/// offset 2m:   Σ_{ℓ≥|m|}        e_{2ℓ}(t)   C(2ℓ, ℓ+m)     p^{ℓ+m}   (1−p)^{ℓ−m}
/// offset 2m+1: Σ_{ℓ≥max(m,−m−1)} e_{2ℓ+1}(t) C(2ℓ+1, ℓ+1+m) p^{ℓ+1+m} (1−p)^{ℓ−m}
/// ```
///
/// At p = 1 the lower band vanishes and the sum collapses to the one-sided
/// entry at the same offset. Near p = 1/2 the ℓ-terms decay like
/// (4p(1−p))^ℓ ℓ^{-2}; if the hard cap is hit a power-law tail estimate is
/// added (good to ~1e-9 there; geometric elsewhere).
pub fn twosided_kernel_weight(offset: i64, t: f64, p: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain("twosided_kernel_weight requires t >= 0"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam { name: "p", reason: "must lie in (0, 1]" });
    }
    if t == 0.0 {
        return Ok(if offset == 0 { 1.0 } else { 0.0 });
    }
    let nu = t;
    // one-sided entries advanced on the fly: e_0 = e^{-nu}, e_1 = nu e_0 / 2
    let mut e_prev = math::exp(-nu);
    let mut e_cur = e_prev * nu / 2.0;
    let mut k = 1usize; // index of e_cur
    let advance = |e_prev: &mut f64, e_cur: &mut f64, k: &mut usize| {
        let kf = *k as f64;
        let e_next = (2.0 * kf - 1.0) / (2.0 * (kf + 1.0)) * *e_cur
            + nu * nu / (4.0 * kf * (kf + 1.0)) * *e_prev;
        *e_prev = *e_cur;
        *e_cur = e_next;
        *k += 1;
    };
    let e_at = |target: usize, e_prev: &mut f64, e_cur: &mut f64, k: &mut usize| -> f64 {
        while *k < target {
            advance(e_prev, e_cur, k);
        }
        if target == 0 {
            math::exp(-nu)
        } else {
            *e_cur
        }
    };

    let even = offset.rem_euclid(2) == 0;
    let m = if even { offset / 2 } else { (offset - 1) / 2 };
    let q = 1.0 - p;
    let (l0, mut bin): (i64, f64) = if even {
        if m >= 0 {
            (m, math::powi(p, 2 * m as i32))
        } else {
            (-m, math::powi(q, -2 * m as i32))
        }
    } else if m >= 0 {
        (m, math::powi(p, 2 * m as i32 + 1))
    } else {
        (-m - 1, math::powi(q, (-2 * m - 1) as i32))
    };

    let mut acc = 0.0;
    let mut l = l0;
    let cap = 500_000i64;
    loop {
        let e_idx = if even { 2 * l } else { 2 * l + 1 } as usize;
        let term = e_at(e_idx, &mut e_prev, &mut e_cur, &mut k) * bin;
        acc += term;
        let lf = l as f64;
        let mf = m as f64;
        let ratio = if even {
            (2.0 * lf + 1.0) * (2.0 * lf + 2.0) / ((lf + 1.0 + mf) * (lf + 1.0 - mf))
        } else {
            (2.0 * lf + 2.0) * (2.0 * lf + 3.0) / ((lf + 2.0 + mf) * (lf + 1.0 - mf))
        };
        bin *= ratio * p * q;
        l += 1;
        if term <= 1e-16 * acc && l > l0 + 4 {
            return Ok(acc);
        }
        if l - l0 > cap {
            // established ℓ^{-2} regime: Σ_{>L} ≈ term·L
            return Ok(acc + term * (l - l0) as f64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalan::{kernel_entry, stationary_chain_coeffs};
    use crate::math::abs;
    use core::f64::consts::PI;

    fn sym_params() -> TwoSidedParams {
        TwoSidedParams::new(1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn hyp2f1_basics() {
        assert_eq!(hyp2f1(0.3, -0.7, 1.9, 0.0).unwrap(), 1.0);
        let v = hyp2f1(-0.25, 0.25, 1.0, 1.0).unwrap();
        assert!(abs(v - 2.0 * math::sqrt(2.0) / PI) < 1e-14, "{v}");
        let v = hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!(abs(v - 2.0 * math::ln(2.0)) < 2e-15, "{v}");
        assert!(hyp2f1(1.0, 1.0, -2.0, 0.5).is_err());
        assert!(hyp2f1(1.0, 3.0, 2.0, 1.0).is_err()); // c-a-b < 0 at z=1
    }

    #[test]
    fn symmetric_values() {
        let s = stationary_twosided_coeffs(&sym_params(), 8).unwrap();
        assert!(abs(s.coeff(0) - 2.0 * math::sqrt(2.0) / PI) < 1e-13);
        assert!(abs(s.coeff(1) + 2.0 * math::sqrt(2.0) / (3.0 * PI)) < 1e-13);
        assert!(abs(s.coeff(1) - s.coeff(-1)) < 1e-15);
    }

    #[test]
    fn series_and_hyp_routes_agree() {
        for j in 0..12usize {
            let a = series_coeff(1.0, 0.72, 0.28, j).unwrap();
            let b = hyp_coeff(1.0, 0.72, 0.28, j).unwrap();
            assert!(abs(a - b) < 1e-13 * abs(a).max(1e-3), "j={j}: {a} vs {b}");
        }
    }

    #[test]
    fn exchange_symmetry() {
        let p1 = TwoSidedParams::new(1.0, 1.0, 0.3, 0.9, 0.6, 1.0, 2.0).unwrap();
        // swap roles: (w, v) -> (v, w) corresponds to mirroring the chain
        let p2 = TwoSidedParams::new(1.0, 1.0, 0.7, 0.6, 0.9, 1.0, 2.0).unwrap();
        assert!(abs(p1.w() - p2.v()) < 1e-15);
        let a = stationary_twosided_coeffs(&p1, 12).unwrap();
        let b = stationary_twosided_coeffs(&p2, 12).unwrap();
        for j in -12i64..=12 {
            assert!(abs(a.coeff(j) - b.coeff(-j)) < 1e-14);
        }
    }

    #[test]
    fn one_sided_reduction_at_wv_zero() {
        // q1 = 0: link weight collapses to pp1 and negative indices vanish
        let params = TwoSidedParams::new(1.3, 1.0, 0.6, 0.8, 0.0, 1.0, 2.0).unwrap();
        let two = stationary_twosided_coeffs(&params, 16).unwrap();
        let chain = stationary_chain_coeffs(params.b(), params.epsilon, 16).unwrap();
        for j in 0..=16usize {
            assert!(abs(two.coeff(j as i64) - chain.coeff(j)) < 1e-14, "j={j}");
        }
        for j in 1..=16i64 {
            assert_eq!(two.coeff(-j), 0.0);
        }
    }

    #[test]
    fn convolution_identity() {
        let params = TwoSidedParams::new(1.0, 1.0, 0.3, 1.0, 1.0, 1.0, 2.0).unwrap();
        let s = stationary_twosided_coeffs(&params, 220).unwrap();
        let eb = s.epsilon_b();
        for j in -2i64..=2 {
            let mut conv = 0.0;
            for k in -220i64..=220 {
                conv += s.coeff(k) * s.coeff(j - k);
            }
            let target = match j {
                0 => eb,
                1 => -eb * s.w(),
                -1 => -eb * s.v(),
                _ => 0.0,
            };
            // dropped products pair a heavy-tail factor with a geometric
            // one, so the truncated identity holds to rounding
            assert!(abs(conv - target) < 1e-12, "j={j}: {conv} vs {target}");
        }
    }

    #[test]
    fn kernel_weight_identity_elements() {
        assert_eq!(twosided_kernel_weight(0, 0.0, 0.3).unwrap(), 1.0);
        assert_eq!(twosided_kernel_weight(3, 0.0, 0.3).unwrap(), 0.0);
        // p -> 1 collapse onto the one-sided kernel
        for off in 0..5i64 {
            let w = twosided_kernel_weight(off, 1.0, 1.0).unwrap();
            let one = kernel_entry(0, off as u64, 1.0, 1.0).unwrap();
            assert!(abs(w - one) < 1e-14, "off={off}: {w} vs {one}");
        }
        let below = twosided_kernel_weight(-1, 1.0, 1.0).unwrap();
        assert!(abs(below) < 1e-300);
    }

    #[test]
    fn kernel_weight_symmetry() {
        for &t in &[0.5, 1.0, 2.0] {
            for j in -6i64..=6 {
                let a = twosided_kernel_weight(j, t, 0.3).unwrap();
                let b = twosided_kernel_weight(-j, t, 0.7).unwrap();
                assert!(abs(a - b) < 1e-12, "t={t} j={j}: {a} vs {b}");
            }
        }
    }
}
