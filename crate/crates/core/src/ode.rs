//! Fixed-step classical Runge–Kutta for the backward Riccati systems.
//!
//! The systems are smooth and non-stiff on the tested parameter ranges, so a
//! deterministic fixed-step RK4 with a step-doubling error estimate is both
//! portable and accurate; adaptivity would buy nothing here.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Backward solution history on a uniform grid `t_0 = 0 .. t_steps = T`.
#[derive(Debug)]
pub(crate) struct BackwardRun {
    /// `rows[i]` is the state at grid time `i * T / steps`.
    pub rows: Vec<Vec<f64>>,
    /// Max-abs discrepancy against a half-step integration.
    pub residual: f64,
}

/// Integrate dy/dt = rhs(y) from the terminal value at `t = horizon` down to
/// `t = 0`, storing every grid row, and estimate the error by re-running at
/// half the step.
pub(crate) fn integrate_backward<F>(
    terminal: &[f64],
    horizon: f64,
    steps: usize,
    mut rhs: F,
) -> Result<BackwardRun>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let coarse = run(terminal, horizon, steps, &mut rhs, true)?;
    let fine = run(terminal, horizon, steps * 2, &mut rhs, false)?;
    let mut residual = 0.0f64;
    for (i, row) in coarse.iter().enumerate() {
        let fine_row = &fine[2 * i];
        for (a, b) in row.iter().zip(fine_row.iter()) {
            residual = residual.max(math::abs(a - b));
        }
    }
    Ok(BackwardRun { rows: coarse, residual })
}

fn run<F>(
    terminal: &[f64],
    horizon: f64,
    steps: usize,
    rhs: &mut F,
    _keep: bool,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = terminal.len();
    let h = -horizon / steps as f64; // marching from T toward 0
    let mut rows = vec![vec![0.0; n]; steps + 1];
    rows[steps].copy_from_slice(terminal);

    let mut y = terminal.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    for i in (0..steps).rev() {
        rhs(&y, &mut k1);
        stage(&y, &k1, 0.5 * h, &mut tmp);
        rhs(&tmp, &mut k2);
        stage(&y, &k2, 0.5 * h, &mut tmp);
        rhs(&tmp, &mut k3);
        stage(&y, &k3, h, &mut tmp);
        rhs(&tmp, &mut k4);
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if !math::is_finite(y[j]) {
                return Err(Error::IntegrationFailure {
                    time: horizon * (i + 1) as f64 / steps as f64,
                });
            }
        }
        rows[i].copy_from_slice(&y);
    }
    Ok(rows)
}

#[inline]
fn stage(y: &[f64], k: &[f64], h: f64, out: &mut [f64]) {
    for j in 0..y.len() {
        out[j] = y[j] + h * k[j];
    }
}
