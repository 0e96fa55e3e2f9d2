//! Stationary solution of the one-sided chain game and its Catalan Markov
//! chain.
//!
//! With ε = 1 the stationary Riccati coefficients are φ⁰ = √p,
//! φ¹ = −√p/2 and φ^k = −√p·(2k−3)!/((k−2)!k!2^{2k−2}) for k ≥ 2, a sequence
//! whose self-convolution vanishes — the Catalan recurrence. The normalized
//! rates q_k = −φ^k/√p form the upper-triangular Toeplitz generator of a
//! continuous-time Markov chain, and the equilibrium state is the Gaussian
//! process driven by its kernel
//!
//! ```text
//! p_{i,i+k}(t) = p^k t^{2k} F^{(k)}(-p t²) / k!,   F^{(k)}(x) = ρ_k(x) e^{-√(-x)}.
//! ```
//!
//! Entries are evaluated two ways: through the closed-form ρ_k sums (log-space
//! above k = 30) and through a forward three-term recurrence obtained from the
//! half-integer Bessel-K ladder, which is what the variance quadrature and the
//! kernel matrices use. The two routes check each other in the tests.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// How a stationary coefficient set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Provenance {
    ClosedForm,
    OdeLimit,
    CauchyOracle,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::OdeLimit => "ode-limit",
            Provenance::CauchyOracle => "cauchy-oracle",
        }
    }
}

/// Stationary coefficients φ⁰..φ^K of the one-sided chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryCoefficients {
    values: Vec<f64>,
    scale: f64,
    provenance: Provenance,
}

impl StationaryCoefficients {
    pub fn from_values(values: Vec<f64>, scale: f64, provenance: Provenance) -> Self {
        Self { values, scale, provenance }
    }

    /// φ^k; zero beyond the truncation.
    pub fn coeff(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// √(pε) prefactor of the closed form.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn truncation(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Truncated sum Σ_{k≤K} φ^k (the infinite sum is zero; the remainder is
    /// the heavy k^{-1/2} tail).
    pub fn tail_sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Closed-form stationary coefficients by the multiplicative ratio
/// recurrence φ^{k+1} = φ^k (2k−1)/(2k+2), k ≥ 1 (no factorials formed).
pub fn stationary_chain_coeffs(p: f64, epsilon: f64, trunc: usize) -> Result<StationaryCoefficients> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParam { name: "p", reason: "must lie in [0, 1]" });
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParam { name: "epsilon", reason: "must be > 0" });
    }
    if trunc < 2 {
        return Err(Error::InvalidParam { name: "trunc", reason: "must be >= 2" });
    }
    let scale = math::sqrt(p * epsilon);
    let mut values = vec![0.0; trunc + 1];
    if p > 0.0 {
        values[0] = scale;
        values[1] = -scale / 2.0;
        for k in 1..trunc {
            values[k + 1] = values[k] * (2.0 * k as f64 - 1.0) / (2.0 * k as f64 + 2.0);
        }
    }
    Ok(StationaryCoefficients { values, scale, provenance: Provenance::ClosedForm })
}

/// Upper-triangular Toeplitz generator row of the Catalan Markov chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    q: Vec<f64>,
    p: f64,
}

impl GeneratorMatrix {
    /// Row coefficients q₀..q_K (q₀ = −1, q_k > 0).
    pub fn row(&self) -> &[f64] {
        &self.q
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.q.get(k).copied().unwrap_or(0.0)
    }

    /// Link probability the √p time scale refers to.
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn truncation(&self) -> usize {
        self.q.len() - 1
    }

    /// Truncated row sum; → 0 as the truncation grows, like −C/√K.
    pub fn row_sum(&self) -> f64 {
        self.q.iter().sum()
    }

    /// Dense truncation (i,j) ↦ q_{j−i}, row-major, for oracle pairings.
    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            for (k, &qk) in self.q.iter().enumerate() {
                if i + k < dim {
                    a[i * dim + i + k] = qk;
                }
            }
        }
        a
    }
}

/// Generator rates q_k = −φ^k/√p with the ε = 1 convention; the √p time
/// scale is applied at kernel evaluation, not here, so the row itself does
/// not depend on p.
pub fn catalan_generator(p: f64, trunc: usize) -> Result<GeneratorMatrix> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam { name: "p", reason: "must lie in (0, 1]" });
    }
    if trunc < 2 {
        return Err(Error::InvalidParam { name: "trunc", reason: "must be >= 2" });
    }
    let phis = stationary_chain_coeffs(1.0, 1.0, trunc)?;
    let q = phis.values().iter().map(|v| -v).collect();
    Ok(GeneratorMatrix { q, p })
}

/// ρ_k(x) for x < 0: the polynomial-in-(−x)^{-1/2} factor of the k-th
/// derivative of e^{-√(-x)}.
///
/// The finite sum uses the (j−1)! numerator, which is what the recursion
/// ρ_{k+1} = ρ_k' + ρ_k/(2√(−x)) forces; a printed variant with (k−1)!
/// circulates but fails the recursion already at k = 2. Terms are positive,
/// so the k > 30 evaluation switches to log-space sums without cancellation.
pub fn rho(k: usize, x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain("rho requires x < 0"));
    }
    Ok(rho_unchecked(k, x))
}

fn rho_unchecked(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let nu = math::sqrt(-x);
    if k <= 30 {
        // first term (j = k) is ν^{-k}; then T_{j+1}/T_j = j(2k−j−1)/((2j+2−2k)ν)
        let mut term = math::powi(1.0 / nu, k as i32);
        let mut acc = term;
        for j in k..(2 * k - 1) {
            let jf = j as f64;
            let kf = k as f64;
            term *= jf * (2.0 * kf - jf - 1.0) / ((2.0 * jf + 2.0 - 2.0 * kf) * nu);
            acc += term;
        }
        acc / math::powi(2.0, k as i32)
    } else {
        // log-sum-exp over j = k..2k-1 of
        //   Γ(j) / (2^{j-k} (j-k)! (2k-j-1)!) ν^{-j}
        let kf = k as f64;
        let ln_nu = math::ln(nu);
        let mut lns: Vec<f64> = Vec::with_capacity(k);
        let mut max_ln = f64::NEG_INFINITY;
        for j in k..(2 * k) {
            let jf = j as f64;
            let l = math::lgamma(jf) - (jf - kf) * core::f64::consts::LN_2
                - math::lgamma(jf - kf + 1.0)
                - math::lgamma(2.0 * kf - jf)
                - jf * ln_nu;
            if l > max_ln {
                max_ln = l;
            }
            lns.push(l);
        }
        let mut acc = 0.0;
        for l in lns {
            acc += math::exp(l - max_ln);
        }
        math::exp(max_ln - kf * core::f64::consts::LN_2) * acc
    }
}

/// Transition-kernel entry p_{ij}(t) of the Catalan Markov chain run at time
/// scale √p: zero below the diagonal, e^{-√p t} on it, and
/// p^{j-i} t^{2(j-i)} F^{(j-i)}(-p t²)/(j-i)! above (log-space assembled).
pub fn kernel_entry(i: u64, j: u64, t: f64, p: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain("kernel_entry requires t >= 0"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam { name: "p", reason: "must lie in (0, 1]" });
    }
    if j < i {
        return Ok(0.0);
    }
    let gap = (j - i) as usize;
    if t == 0.0 {
        return Ok(if gap == 0 { 1.0 } else { 0.0 });
    }
    let nu = math::sqrt(p) * t;
    if gap == 0 {
        return Ok(math::exp(-nu));
    }
    let x = -p * t * t;
    let g = gap as f64;
    let ln_val = g * math::ln(p * t * t) - math::lgamma(g + 1.0) + math::ln(rho_unchecked(gap, x)) - nu;
    Ok(math::exp(ln_val))
}

/// Kernel row entries for gaps 0..=gap_max by the forward recurrence
/// e_{k+1} = (2k−1)/(2k+2)·e_k + ν²/(4k(k+1))·e_{k−1}, e₀ = e^{-ν},
/// e₁ = ν e^{-ν}/2, with ν = √p t. The recurrence tracks the dominant
/// (K-Bessel) solution, so it is forward-stable.
pub fn kernel_row(gap_max: usize, t: f64, p: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::Domain("kernel_row requires t >= 0"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam { name: "p", reason: "must lie in (0, 1]" });
    }
    let nu = math::sqrt(p) * t;
    let mut row = vec![0.0; gap_max + 1];
    if nu == 0.0 {
        row[0] = 1.0;
        return Ok(row);
    }
    row[0] = math::exp(-nu);
    if gap_max >= 1 {
        row[1] = row[0] * nu / 2.0;
    }
    for k in 1..gap_max {
        let kf = k as f64;
        row[k + 1] = (2.0 * kf - 1.0) / (2.0 * (kf + 1.0)) * row[k]
            + nu * nu / (4.0 * kf * (kf + 1.0)) * row[k - 1];
    }
    Ok(row)
}

/// Σ_k e_k(ν)² — the integrand of the variance quadrature — summed past the
/// k ≈ ν² hump into the established k^{-3/2} regime, plus a power-law tail
/// correction. `window` caps the sum at a hard index with no correction
/// (the exact law of the first player of a zero-tail truncation).
fn kernel_row_sum_sq(nu: f64, window: Option<usize>) -> f64 {
    if nu == 0.0 {
        return 1.0;
    }
    let e0 = math::exp(-nu);
    let mut e_prev = e0;
    let mut e_cur = e0 * nu / 2.0;
    let cap = match window {
        Some(n) => n.saturating_sub(1), // entries e_0..e_{n-1}
        None => usize::MAX,
    };
    let mut acc = e_prev * e_prev;
    if cap >= 1 {
        acc += e_cur * e_cur;
    }
    if cap <= 1 {
        return acc;
    }
    let hard_stop = match window {
        Some(_) => cap,
        // heavy-tail regime is established a few multiples past k = ν²
        None => (12.0 * nu * nu) as usize + 1200,
    };
    let mut k = 1usize;
    while k < hard_stop {
        let kf = k as f64;
        let e_next =
            (2.0 * kf - 1.0) / (2.0 * (kf + 1.0)) * e_cur + nu * nu / (4.0 * kf * (kf + 1.0)) * e_prev;
        acc += e_next * e_next;
        e_prev = e_cur;
        e_cur = e_next;
        k += 1;
        if window.is_none() && e_cur * e_cur * kf < 1e-22 * acc && kf > 2.0 * nu + 8.0 {
            return acc; // tail numerically immaterial
        }
    }
    if window.is_none() {
        // Σ_{j>K} e_j² ≈ e_K² K/2 (1 + 3/(2K) + ν²/(6K)); the ν² term is the
        // subleading Bessel-order correction, calibrated to ~0.2% of the tail
        let kf = hard_stop as f64;
        acc += e_cur * e_cur * kf / 2.0 * (1.0 + 1.5 / kf + nu * nu / (6.0 * kf));
    }
    acc
}

/// Result of the variance quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Relative change of the final panel doubling.
    pub achieved: f64,
    pub panels: usize,
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; mirror).
const GL_X: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL_W: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

fn integrate_sum_sq(t: f64, p: f64, panels: usize, window: Option<usize>) -> f64 {
    let h = t / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let mid = (i as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL_X.iter().zip(GL_W.iter()) {
            let u_lo = mid - half * x;
            let u_hi = mid + half * x;
            acc += w * half
                * (kernel_row_sum_sq(math::sqrt(p) * u_lo, window)
                    + kernel_row_sum_sq(math::sqrt(p) * u_hi, window));
        }
    }
    acc
}

/// Var(X_t¹) = ∫₀ᵗ Σ_j p_{1j}(u)² du for the stationary equilibrium with
/// σ = 1 (general σ scales the result by σ²). Composite Gauss–Legendre with
/// panel doubling until the relative change drops below 1e-6.
pub fn variance_chain(t: f64, p: f64, initial_panels: usize) -> Result<VarianceEstimate> {
    variance_chain_impl(t, p, initial_panels, None)
}

/// Same quadrature with the kernel row hard-truncated at `window` columns:
/// the exact variance law of player 1 in an N = `window` zero-tail
/// truncation, used by the simulation crosscheck.
pub fn variance_chain_windowed(
    t: f64,
    p: f64,
    initial_panels: usize,
    window: usize,
) -> Result<VarianceEstimate> {
    variance_chain_impl(t, p, initial_panels, Some(window))
}

fn variance_chain_impl(
    t: f64,
    p: f64,
    initial_panels: usize,
    window: Option<usize>,
) -> Result<VarianceEstimate> {
    if !(t >= 0.0) {
        return Err(Error::Domain("variance_chain requires t >= 0"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParam { name: "p", reason: "must lie in (0, 1]" });
    }
    if t == 0.0 {
        return Ok(VarianceEstimate { value: 0.0, achieved: 0.0, panels: 0 });
    }
    let mut panels = initial_panels.max(4).max((t / 2.0) as usize);
    let mut prev = integrate_sum_sq(t, p, panels, window);
    for _ in 0..6 {
        panels *= 2;
        let cur = integrate_sum_sq(t, p, panels, window);
        let rel = math::abs(cur - prev) / math::abs(cur).max(1e-300);
        if rel <= 1e-6 {
            return Ok(VarianceEstimate { value: cur, achieved: rel, panels });
        }
        prev = cur;
    }
    Err(Error::Accuracy { wanted: 1e-6, achieved: math::abs(prev) })
}

/// t → ∞ variance limit 1/√(2p).
pub fn asymptotic_variance_chain(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain("asymptotic variance diverges at p = 0"));
    }
    Ok(1.0 / math::sqrt(2.0 * p))
}

/// Modified Bessel function of the second kind at half-integer order,
/// K_{n+1/2}(x) = √(π/(2x)) e^{-x} Σ_{k=0}^n (n+k)!/(k!(n−k)!(2x)^k).
pub fn bessel_k_half(n: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain("bessel_k_half requires x > 0"));
    }
    let mut term = 1.0;
    let mut acc = 1.0;
    let nf = f64::from(n);
    for k in 0..n {
        let kf = f64::from(k);
        term *= (nf + kf + 1.0) * (nf - kf) / ((kf + 1.0) * 2.0 * x);
        acc += term;
    }
    Ok(math::sqrt(core::f64::consts::PI / (2.0 * x)) * math::exp(-x) * acc)
}
