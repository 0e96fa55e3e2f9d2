//! Backward solvers for the finite-horizon Riccati systems and their
//! closed-form generating functions.
//!
//! Both games reduce to the same scalar Riccati equation in generating
//! function form: Ṡ_t(z) = S_t(z)² − εT(z) with S_T(z) = cT(z), where
//! T(z) = p(1−z) for the one-sided chain and
//! T(z) = (1−1/z)(1−p)q₁ + (1−z)p·p₁ for the two-sided chain. The solution
//!
//! ```text
//! S_t(z) = b (q + b·tanh(b τ)) / (b + q·tanh(b τ)),   b = √(εT), q = cT, τ = T − t
//! ```
//!
//! is evaluated with the principal square root and a saturating complex tanh,
//! so large b·τ never overflows. Coefficient-space solutions come from RK4 on
//! the distance-indexed convolution systems; the one-sided system is lower
//! triangular in the index, so its truncation at K is exact for k ≤ K.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;
use crate::ode;
use crate::params::{ChainParams, TwoSidedParams};
use crate::{Error, Result};

/// Coefficient functions φ_t^k on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    grid: Vec<f64>,
    min_index: i64,
    rows: Vec<Vec<f64>>,
    residual: f64,
    sum_residual: f64,
}

impl RiccatiSolution {
    /// Strictly increasing grid t₀ = 0 .. t_N = T.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Smallest stored coefficient index (0 one-sided, −K two-sided).
    pub fn min_index(&self) -> i64 {
        self.min_index
    }

    pub fn max_index(&self) -> i64 {
        self.min_index + self.rows[0].len() as i64 - 1
    }

    /// Index truncation K.
    pub fn truncation(&self) -> usize {
        self.max_index() as usize
    }

    /// φ at a grid point; zero outside the stored index window.
    pub fn coeff(&self, time_idx: usize, k: i64) -> f64 {
        if k < self.min_index || k > self.max_index() {
            return 0.0;
        }
        self.rows[time_idx][(k - self.min_index) as usize]
    }

    /// All coefficients at one grid point, ordered min_index..=max_index.
    pub fn row(&self, time_idx: usize) -> &[f64] {
        &self.rows[time_idx]
    }

    /// Linear interpolation of the whole coefficient row at time t.
    pub fn interp_row(&self, t: f64, out: &mut [f64]) {
        let horizon = *self.grid.last().unwrap();
        let steps = self.grid.len() - 1;
        let s = (t.clamp(0.0, horizon) / horizon) * steps as f64;
        let i0 = (s as usize).min(steps - 1);
        let w = s - i0 as f64;
        let (a, b) = (&self.rows[i0], &self.rows[i0 + 1]);
        for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b.iter())) {
            *o = x + w * (y - x);
        }
    }

    /// Max-abs step-doubling discrepancy of the integration.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// max_t |Σ_k φ_t^k| over the grid (zero for the untruncated system).
    pub fn sum_residual(&self) -> f64 {
        self.sum_residual
    }

    fn finish(grid: Vec<f64>, min_index: i64, run: ode::BackwardRun) -> Self {
        let mut sum_residual = 0.0f64;
        for row in &run.rows {
            let s: f64 = row.iter().sum();
            sum_residual = sum_residual.max(math::abs(s));
        }
        Self { grid, min_index, rows: run.rows, residual: run.residual, sum_residual }
    }
}

fn uniform_grid(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect()
}

/// Solve the one-sided chain system
/// φ̇⁰ = (φ⁰)² − pε, φ̇¹ = 2φ⁰φ¹ + pε, φ̇^k = Σ_{j≤k} φ^j φ^{k−j}
/// backward from φ_T = (pc, −pc, 0, ...).
pub fn solve_chain_riccati(params: &ChainParams, trunc: usize, steps: usize) -> Result<RiccatiSolution> {
    params.validate()?;
    if trunc < 2 {
        return Err(Error::InvalidParam { name: "trunc", reason: "must be >= 2" });
    }
    if steps < 2 {
        return Err(Error::InvalidParam { name: "steps", reason: "must be >= 2" });
    }
    let grid = uniform_grid(params.horizon, steps);
    if params.p == 0.0 {
        // all sources and terminal data vanish
        let rows = vec![vec![0.0; trunc + 1]; steps + 1];
        return Ok(RiccatiSolution {
            grid,
            min_index: 0,
            rows,
            residual: 0.0,
            sum_residual: 0.0,
        });
    }
    let pe = params.p * params.epsilon;
    let mut terminal = vec![0.0; trunc + 1];
    terminal[0] = params.p * params.c;
    terminal[1] = -params.p * params.c;
    let run = ode::integrate_backward(&terminal, params.horizon, steps, |y, dy| {
        for k in 0..y.len() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += y[j] * y[k - j];
            }
            dy[k] = acc;
        }
        dy[0] -= pe;
        dy[1] += pe;
    })?;
    Ok(RiccatiSolution::finish(grid, 0, run))
}

/// Solve the two-sided system on the index window −K..K:
/// φ̇^j = Σ_k φ^k φ^{j−k} + δ_{j,1}εp·p₁ − δ_{j,0}εB + δ_{j,−1}ε(1−p)q₁.
pub fn solve_twosided_riccati(
    params: &TwoSidedParams,
    trunc: usize,
    steps: usize,
) -> Result<RiccatiSolution> {
    params.validate()?;
    if trunc < 2 {
        return Err(Error::InvalidParam { name: "trunc", reason: "must be >= 2" });
    }
    if steps < 2 {
        return Err(Error::InvalidParam { name: "steps", reason: "must be >= 2" });
    }
    let n = 2 * trunc + 1;
    let mid = trunc; // storage index of j = 0
    let right = params.epsilon * params.right_weight();
    let left = params.epsilon * params.left_weight();
    let total = params.epsilon * params.b();

    let mut terminal = vec![0.0; n];
    terminal[mid] = params.c * params.b();
    terminal[mid + 1] = -params.c * params.right_weight();
    terminal[mid - 1] = -params.c * params.left_weight();

    let run = ode::integrate_backward(&terminal, params.horizon, steps, |y, dy| {
        // truncated two-sided self-convolution
        for d in dy.iter_mut() {
            *d = 0.0;
        }
        for a in 0..n {
            let ya = y[a];
            if ya == 0.0 {
                continue;
            }
            // a + b - mid in range
            let lo = mid.saturating_sub(a);
            let hi = (n + mid - a).min(n);
            for b in lo..hi {
                dy[a + b - mid] += ya * y[b];
            }
        }
        dy[mid + 1] += right;
        dy[mid] -= total;
        dy[mid - 1] += left;
    })?;
    let grid = uniform_grid(params.horizon, steps);
    Ok(RiccatiSolution::finish(grid, -(trunc as i64), run))
}

/// S_t(z) = b(q + b·th)/(b + q·th), th = tanh(bτ), for Ṡ = S² − b², S_T = q.
fn scalar_riccati(bsq: Complex64, q: Complex64, tau: f64) -> Result<Complex64> {
    if bsq.norm() == 0.0 {
        // Ṡ = S² alone; with q = 0 this is identically zero
        let den = Complex64::new(1.0, 0.0) + q * tau;
        if den.norm() < 1e-14 {
            return Err(Error::Domain("generating function pole"));
        }
        return Ok(q / den);
    }
    let b = bsq.sqrt();
    let th = math::ctanh(b * tau);
    let den = b + q * th;
    if den.norm() <= 1e-14 * (b.norm() + q.norm()) {
        return Err(Error::Domain("generating function pole"));
    }
    Ok(b * (q + b * th) / den)
}

/// Closed-form S_t(z) of the one-sided chain; exactly 0 at z = 1.
pub fn eval_generating_function_chain(
    params: &ChainParams,
    z: Complex64,
    t: f64,
) -> Result<Complex64> {
    params.validate()?;
    if !(0.0..=params.horizon).contains(&t) {
        return Err(Error::Domain("t must lie in [0, T]"));
    }
    let tz = (Complex64::new(1.0, 0.0) - z) * params.p;
    scalar_riccati(tz * params.epsilon, tz * params.c, params.horizon - t)
}

/// Closed-form S_t(z) of the two-sided chain; 0 at the roots of T(z),
/// domain error at z = 0.
pub fn eval_generating_function_twosided(
    params: &TwoSidedParams,
    z: Complex64,
    t: f64,
) -> Result<Complex64> {
    params.validate()?;
    if z.norm() == 0.0 {
        return Err(Error::Domain("two-sided generating function undefined at z = 0"));
    }
    if !(0.0..=params.horizon).contains(&t) {
        return Err(Error::Domain("t must lie in [0, T]"));
    }
    let one = Complex64::new(1.0, 0.0);
    let tz = (one - one / z) * params.left_weight() + (one - z) * params.right_weight();
    scalar_riccati(tz * params.epsilon, tz * params.c, params.horizon - t)
}

/// Evaluate Σ_k z^k φ^k over a stored coefficient row.
///
/// The positive side decays superexponentially at finite horizon; the
/// negative side is summed with smallest-term truncation: once terms fall
/// under 1e-12 of the running sum and stop decreasing, the remainder is
/// solver noise amplified by z^{-k}, not signal, and is dropped.
pub fn series_value(row: &[f64], min_index: i64, z: Complex64) -> Complex64 {
    let max_index = min_index + row.len() as i64 - 1;
    let at = |k: i64| row[(k - min_index) as usize];
    let mut acc = Complex64::new(0.0, 0.0);
    // k >= 0 ascending
    let mut zk = Complex64::new(1.0, 0.0);
    for k in 0..=max_index.max(0) {
        if k > max_index {
            break;
        }
        acc += zk * at(k);
        zk *= z;
    }
    if min_index >= 0 {
        return acc;
    }
    // k < 0 descending with noise-floor truncation
    let zinv = Complex64::new(1.0, 0.0) / z;
    let mut zk = zinv;
    let mut prev_mag = f64::INFINITY;
    for k in 1..=(-min_index) {
        let term = zk * at(-k);
        let mag = term.norm();
        if mag > prev_mag && mag < 1e-12 * acc.norm() {
            break;
        }
        acc += term;
        prev_mag = mag.max(1e-300);
        zk *= zinv;
    }
    acc
}
