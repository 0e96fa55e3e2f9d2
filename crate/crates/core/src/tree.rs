//! Riccati system of the random directed M-ary tree game, reduced by depth.
//!
//! Equilibrium coefficients depend only on the generation gap between a
//! player and a descendant, not on which node carries them. In the unreduced
//! system the quadratic coupling for a pair at depth m sums one product per
//! intermediate generation (the unique ancestor path), so the reduced system
//! is the plain convolution
//!
//! ```text
//! Ψ̇⁰ = (Ψ⁰)² − ε(1−p₀),  Ψ̇¹ = 2Ψ⁰Ψ¹ + ε(1−p₀)/M,
//! Ψ̇^m = Σ_{j=0}^m Ψ^j Ψ^{m−j}  (m ≥ 2),
//! Ψ_T⁰ = c(1−p₀),  Ψ_T¹ = −c(1−p₀)/M,  Ψ_T^m = 0,
//! ```
//!
//! with p₀ = (1−p)^M the probability of having no link at all. At p = 1 this
//! is the deterministic-tree system, and at M = 1 the one-sided chain. The
//! depth reduction is validated against [`crate::oracle::brute_force_tree`].

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::ode;
use crate::oracle;
use crate::params::TreeParams;
use crate::riccati::RiccatiSolution;
use crate::{ChainParams, Error, Result};

/// Depth-indexed coefficients Ψ^m_t on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeRiccatiSolution {
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
    residual: f64,
}

impl TreeRiccatiSolution {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Stored truncation depth D.
    pub fn depth(&self) -> usize {
        self.rows[0].len() - 1
    }

    pub fn coeff(&self, time_idx: usize, depth: usize) -> f64 {
        self.rows[time_idx].get(depth).copied().unwrap_or(0.0)
    }

    pub fn row(&self, time_idx: usize) -> &[f64] {
        &self.rows[time_idx]
    }

    /// Linear interpolation of the depth row at time t.
    pub fn interp_row(&self, t: f64, out: &mut [f64]) {
        let horizon = *self.grid.last().unwrap();
        let steps = self.grid.len() - 1;
        let s = (t.clamp(0.0, horizon) / horizon) * steps as f64;
        let i0 = (s as usize).min(steps - 1);
        let w = s - i0 as f64;
        for (m, o) in out.iter_mut().enumerate() {
            let a = self.rows[i0][m];
            let b = self.rows[i0 + 1][m];
            *o = a + w * (b - a);
        }
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn tree_rhs(weight_eps: f64, per_child: f64) -> impl FnMut(&[f64], &mut [f64]) {
    move |y, dy| {
        for m in 0..y.len() {
            let mut acc = 0.0;
            for j in 0..=m {
                acc += y[j] * y[m - j];
            }
            dy[m] = acc;
        }
        dy[0] -= weight_eps;
        dy[1] += per_child;
    }
}

/// Solve the depth-reduced tree system down from t = T.
pub fn solve_tree_riccati(params: &TreeParams, depth: usize, steps: usize) -> Result<TreeRiccatiSolution> {
    params.validate()?;
    if depth < 1 {
        return Err(Error::InvalidParam { name: "depth", reason: "must be >= 1" });
    }
    if steps < 2 {
        return Err(Error::InvalidParam { name: "steps", reason: "must be >= 2" });
    }
    let weight = params.effective_weight();
    let m = f64::from(params.branching);
    let mut terminal = vec![0.0; depth + 1];
    terminal[0] = params.c * weight;
    terminal[1] = -params.c * weight / m;
    let run = ode::integrate_backward(
        &terminal,
        params.horizon,
        steps,
        tree_rhs(params.epsilon * weight, params.epsilon * weight / m),
    )?;
    let grid = (0..=steps).map(|i| params.horizon * i as f64 / steps as f64).collect();
    Ok(TreeRiccatiSolution { grid, rows: run.rows, residual: run.residual })
}

/// Solve the deterministic-tree system (all links present) through an
/// independent code path and return the max grid-wide discrepancy against
/// the p = 1 random-tree solution.
pub fn deterministic_limit_check(params: &TreeParams, depth: usize, steps: usize) -> Result<f64> {
    if params.p != 1.0 {
        return Err(Error::InvalidParam { name: "p", reason: "deterministic limit requires p = 1" });
    }
    let random = solve_tree_riccati(params, depth, steps)?;
    let m = f64::from(params.branching);
    let mut terminal = vec![0.0; depth + 1];
    terminal[0] = params.c;
    terminal[1] = -params.c / m;
    let run = ode::integrate_backward(&terminal, params.horizon, steps, |y, dy| {
        for k in 0..y.len() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += y[j] * y[k - j];
            }
            dy[k] = acc;
        }
        dy[0] -= params.epsilon;
        dy[1] += params.epsilon / m;
    })?;
    let mut worst = 0.0f64;
    for (ti, det_row) in run.rows.iter().enumerate() {
        for (m_idx, det) in det_row.iter().enumerate() {
            worst = worst.max(math::abs(det - random.coeff(ti, m_idx)));
        }
    }
    Ok(worst)
}

/// Report of the brute-force depth-invariance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthInvarianceReport {
    /// Max over the grid of |φ^{a;b} − φ^{a';b'}| across same-depth pairs.
    pub same_depth_discrepancy: f64,
    /// Max over the grid of |Ψ^m − φ^{a;b}| between the reduced solver and
    /// the unreduced tree.
    pub reduced_vs_brute: f64,
}

/// Integrate the full per-node system on an explicit G-generation tree and
/// measure how far same-depth coefficients spread, and how far the reduced
/// solver sits from them.
pub fn verify_depth_invariance(
    params: &TreeParams,
    generations: usize,
    steps: usize,
) -> Result<DepthInvarianceReport> {
    let brute = oracle::brute_force_tree(params, generations, steps)?;
    let reduced = solve_tree_riccati(params, generations.max(2) - 1, steps)?;

    // group pairs by depth
    let mut same_depth = 0.0f64;
    let mut vs_reduced = 0.0f64;
    let gen_of = |node: usize| -> usize {
        let mut g = 0;
        let mut total = 0usize;
        let mut width = 1usize;
        loop {
            total += width;
            if node < total {
                return g;
            }
            width *= brute.branching;
            g += 1;
        }
    };
    let max_depth = generations - 1;
    for d in 0..=max_depth {
        let mut reference: Option<usize> = None;
        for (s, &(a, b)) in brute.pairs().iter().enumerate() {
            if gen_of(b) - gen_of(a) != d {
                continue;
            }
            match reference {
                None => reference = Some(s),
                Some(r) => {
                    for (x, y) in brute.trajectory(r).iter().zip(brute.trajectory(s).iter()) {
                        same_depth = same_depth.max(math::abs(x - y));
                    }
                }
            }
            for (ti, v) in brute.trajectory(s).iter().enumerate() {
                vs_reduced = vs_reduced.max(math::abs(v - reduced.coeff(ti, d)));
            }
        }
    }
    Ok(DepthInvarianceReport { same_depth_discrepancy: same_depth, reduced_vs_brute: vs_reduced })
}

/// States of an explicit finite tree, generation-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeState {
    branching: usize,
    values: Vec<Vec<f64>>,
}

impl TreeState {
    pub fn zeros(branching: u32, generations: usize) -> Self {
        let m = branching as usize;
        let mut values = Vec::with_capacity(generations);
        let mut width = 1usize;
        for _ in 0..generations {
            values.push(vec![0.0; width]);
            width *= m;
        }
        Self { branching: m, values }
    }

    pub fn generations(&self) -> usize {
        self.values.len()
    }

    pub fn set(&mut self, generation: usize, index: usize, value: f64) {
        self.values[generation][index] = value;
    }

    pub fn get(&self, generation: usize, index: usize) -> f64 {
        self.values[generation][index]
    }

    /// Sum of the states of the depth-m descendants of (generation, index).
    pub fn descendant_sum(&self, generation: usize, index: usize, depth: usize) -> f64 {
        let g = generation + depth;
        let width = self.branching.pow(depth as u32);
        self.values[g][index * width..(index + 1) * width].iter().sum()
    }
}

/// Equilibrium drift of one node and the truncation bias of the cut
/// descendant tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub drift: f64,
    /// Σ_{m beyond the stored tree} M^m |Ψ^m(t)| — weight that had no states
    /// to act on.
    pub dropped_weight: f64,
}

/// Drift −Σ_m Ψ^m(t) Σ_{descendants at depth m} X of node (generation,
/// index) on a finite stored tree; depths beyond the tree contribute zero
/// state and are reported as dropped weight.
pub fn tree_equilibrium_drift(
    solution: &TreeRiccatiSolution,
    state: &TreeState,
    generation: usize,
    index: usize,
    t: f64,
) -> Result<DriftReport> {
    if generation >= state.generations() || index >= state.values[generation].len() {
        return Err(Error::InvalidParam { name: "node", reason: "outside the stored tree" });
    }
    let mut coeffs = vec![0.0; solution.depth() + 1];
    solution.interp_row(t, &mut coeffs);
    let avail = state.generations() - 1 - generation;
    let mut drift = 0.0;
    for (m, &psi) in coeffs.iter().enumerate().take(avail.min(solution.depth()) + 1) {
        drift -= psi * state.descendant_sum(generation, index, m);
    }
    let mut dropped = 0.0;
    let mf = state.branching as f64;
    for (m, &psi) in coeffs.iter().enumerate().skip(avail + 1) {
        dropped += math::powi(mf, m as i32) * math::abs(psi);
    }
    Ok(DriftReport { drift, dropped_weight: dropped })
}

/// The M = 1, p = 1 tree is the deterministic one-sided chain; returns the
/// grid-wide max discrepancy between the two solvers.
pub fn chain_consistency_check(epsilon: f64, c: f64, horizon: f64, depth: usize, steps: usize) -> Result<f64> {
    let tree = TreeParams::new(1, 1.0, epsilon, c, 1.0, horizon)?;
    let chain = ChainParams::new(epsilon, c, 1.0, 1.0, horizon)?;
    let a = solve_tree_riccati(&tree, depth, steps)?;
    let b = crate::riccati::solve_chain_riccati(&chain, depth.max(2), steps)?;
    Ok(max_diff_tree_chain(&a, &b, depth))
}

fn max_diff_tree_chain(a: &TreeRiccatiSolution, b: &RiccatiSolution, depth: usize) -> f64 {
    let mut worst = 0.0f64;
    for ti in 0..a.grid().len() {
        for m in 0..=depth {
            worst = worst.max(math::abs(a.coeff(ti, m) - b.coeff(ti, m as i64)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;

    fn params(m: u32, p: f64, c: f64, horizon: f64) -> TreeParams {
        TreeParams::new(m, p, 1.0, c, 1.0, horizon).unwrap()
    }

    #[test]
    fn terminal_slice() {
        let sol = solve_tree_riccati(&params(2, 0.5, 1.0, 2.0), 6, 100).unwrap();
        let last = sol.grid().len() - 1;
        assert!(abs(sol.coeff(last, 0) - 0.75) < 1e-15);
        assert!(abs(sol.coeff(last, 1) + 0.375) < 1e-15);
        assert_eq!(sol.coeff(last, 2), 0.0);
    }

    #[test]
    fn long_horizon_reaches_stationary_root() {
        let sol = solve_tree_riccati(&params(2, 0.5, 0.0, 40.0), 8, 4000).unwrap();
        assert!(abs(sol.coeff(0, 0) - math::sqrt(0.75)) < 1e-9);
    }

    #[test]
    fn chain_equivalence_m1() {
        let worst = chain_consistency_check(1.0, 0.7, 3.0, 10, 600).unwrap();
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn deterministic_limit() {
        assert!(deterministic_limit_check(&params(2, 1.0, 1.0, 1.0), 8, 400).unwrap() < 1e-12);
        assert!(deterministic_limit_check(&params(5, 1.0, 0.0, 1.0), 6, 400).unwrap() < 1e-12);
        assert!(deterministic_limit_check(&params(2, 0.5, 1.0, 1.0), 4, 100).is_err());
    }

    #[test]
    fn drift_reports() {
        let sol = solve_tree_riccati(&params(2, 0.5, 1.0, 2.0), 6, 200).unwrap();
        let mut state = TreeState::zeros(2, 3);
        let r = tree_equilibrium_drift(&sol, &state, 0, 0, 1.0).unwrap();
        assert_eq!(r.drift, 0.0);
        // root-only perturbation: drift at root = -Psi^0
        state.set(0, 0, 1.0);
        let mut coeffs = vec![0.0; sol.depth() + 1];
        sol.interp_row(1.0, &mut coeffs);
        let r = tree_equilibrium_drift(&sol, &state, 0, 0, 1.0).unwrap();
        assert!(abs(r.drift + coeffs[0]) < 1e-15);
        // both depth-1 nodes at 1, root back to 0: drift = -2 Psi^1
        state.set(0, 0, 0.0);
        state.set(1, 0, 1.0);
        state.set(1, 1, 1.0);
        let r = tree_equilibrium_drift(&sol, &state, 0, 0, 1.0).unwrap();
        assert!(abs(r.drift + 2.0 * coeffs[1]) < 1e-15);
        // dropped weight counts depths beyond the stored tree
        assert!(r.dropped_weight > 0.0);
        assert!(tree_equilibrium_drift(&sol, &state, 3, 0, 1.0).is_err());
    }

    #[test]
    fn depth_weight_partial_sums_decay() {
        // total drift weight sum_m M^m Psi^m tends to 0 (value at z = M of
        // the depth generating function); partial sums shrink monotonically
        let sol = solve_tree_riccati(&params(2, 1.0, 0.0, 30.0), 24, 3000).unwrap();
        let row = sol.row(0);
        let mut partial = 0.0;
        let mut prev = f64::INFINITY;
        for (m, &psi) in row.iter().enumerate() {
            partial += math::powi(2.0, m as i32) * psi;
            if m >= 1 {
                assert!(abs(partial) < prev + 1e-14, "m={m}: {partial} vs {prev}");
            }
            prev = abs(partial);
        }
        assert!(prev < 0.12, "{prev}");
    }

    #[test]
    fn objective_collapse_identity() {
        // sum_d p_d C(M,d)^{-1} sum_{|I|=d} (1/d) sum_{j in I} x_j
        //   = (1 - p0) mean(x), checked exactly by subset enumeration
        for m in 1..=5usize {
            let p = 0.37;
            let xs: Vec<f64> = (0..m).map(|i| 0.3 + 1.7 * i as f64).collect();
            let mut lhs = 0.0;
            for mask in 1u32..(1 << m) {
                let d = mask.count_ones() as usize;
                // P(exact subset) = p^d (1-p)^(M-d); the C(M,d) and p_d
                // factors cancel against the subset count
                let prob = math::powi(p, d as i32) * math::powi(1.0 - p, (m - d) as i32);
                let mut s = 0.0;
                for (j, x) in xs.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        s += x;
                    }
                }
                lhs += prob * s / d as f64;
            }
            let p0 = math::powi(1.0 - p, m as i32);
            let rhs = (1.0 - p0) * xs.iter().sum::<f64>() / m as f64;
            assert!(abs(lhs - rhs) < 1e-14, "M={m}: {lhs} vs {rhs}");
        }
    }
}
