//! Euler–Maruyama simulation of the equilibrium dynamics on truncated
//! player sets, Monte Carlo cost estimation, and a unilateral-deviation
//! (Nash) tester.
//!
//! The infinite systems are closed two ways: `Periodic` wraps indices on a
//! ring (shift invariance preserved; the default) and `ZeroTail` drops
//! couplings past the stored window (the first player of a one-sided
//! zero-tail truncation has exactly the law of the infinite-system player
//! restricted to its first N kernel columns, which is what the variance
//! crosscheck relies on). Noise comes from the counter RNG, so a path's
//! increments depend only on `(seed, path, player, step)` and every result
//! is bitwise reproducible under any scheduling; common random numbers
//! across deviation arms are automatic.

use alloc::vec;
use alloc::vec::Vec;

use crate::catalan::{self, StationaryCoefficients};
use crate::math;
use crate::params::{ChainParams, TreeParams, TwoSidedParams};
use crate::riccati::RiccatiSolution;
use crate::rng::{CounterRng, RNG_ID};
use crate::tree::TreeRiccatiSolution;
use crate::twosided::TwoSidedStationary;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    Chain,
    TwoSided,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundaryPolicy {
    Periodic,
    ZeroTail,
}

impl BoundaryPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryPolicy::Periodic => "periodic",
            BoundaryPolicy::ZeroTail => "zero-tail",
        }
    }
}

/// Model parameters for the simulated geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimModel {
    Chain(ChainParams),
    TwoSided(TwoSidedParams),
    Tree(TreeParams),
}

impl SimModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            SimModel::Chain(_) => ModelKind::Chain,
            SimModel::TwoSided(_) => ModelKind::TwoSided,
            SimModel::Tree(_) => ModelKind::Tree,
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            SimModel::Chain(p) => p.sigma,
            SimModel::TwoSided(p) => p.sigma,
            SimModel::Tree(p) => p.sigma,
        }
    }

    pub fn horizon(&self) -> f64 {
        match self {
            SimModel::Chain(p) => p.horizon,
            SimModel::TwoSided(p) => p.horizon,
            SimModel::Tree(p) => p.horizon,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SimModel::Chain(p) => p.validate(),
            SimModel::TwoSided(p) => p.validate(),
            SimModel::Tree(p) => p.validate(),
        }
    }
}

/// Simulation controls. `size` is the player count N for the chains and the
/// generation count G for the tree. Initial states are the zero
/// normalization of the game.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SimConfig {
    pub size: usize,
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub boundary: BoundaryPolicy,
    /// Player whose statistics are tracked (flattened node id for trees).
    pub track_player: usize,
    /// Overrides the model diffusion; σ = 0 is allowed here for
    /// fixed-point diagnostics even though the game itself requires σ > 0.
    pub sigma_override: Option<f64>,
}

impl SimConfig {
    pub fn new(size: usize, paths: usize, dt: f64, seed: u64) -> Self {
        Self {
            size,
            paths,
            dt,
            seed,
            boundary: BoundaryPolicy::Periodic,
            track_player: 0,
            sigma_override: None,
        }
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_track(mut self, player: usize) -> Self {
        self.track_player = player;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma_override = Some(sigma);
        self
    }
}

/// Strategy source for the drift coefficients.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    Stationary(&'a StationaryCoefficients),
    TwoSidedStationary(&'a TwoSidedStationary),
    Riccati(&'a RiccatiSolution),
    Tree(&'a TreeRiccatiSolution),
}

struct TreeShape {
    branching: usize,
    generations: usize,
    offsets: Vec<usize>,
    widths: Vec<usize>,
    total: usize,
}

impl TreeShape {
    fn new(branching: usize, generations: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(generations);
        let mut widths = Vec::with_capacity(generations);
        let mut total = 0usize;
        let mut w = 1usize;
        for _ in 0..generations {
            offsets.push(total);
            widths.push(w);
            total += w;
            if total > 100_000 {
                return Err(Error::Resource("tree exceeds 10^5 nodes"));
            }
            w = w.saturating_mul(branching);
        }
        Ok(Self { branching, generations, offsets, widths, total })
    }
}

/// Precomputed per-path integrator for one (model, config, strategy).
///
/// All `run_*` methods are pure functions of the path index, so they can be
/// fanned out across threads and reduced in path order with bitwise
/// deterministic results.
pub struct PathRunner<'a> {
    model: &'a SimModel,
    config: SimConfig,
    steps: usize,
    duration: f64,
    sigma: f64,
    noise_scale: f64,
    rng: CounterRng,
    /// coefficient rows at each grid time (single row when constant in t)
    rows: Vec<Vec<f64>>,
    min_offset: i64,
    players: usize,
    tree: Option<TreeShape>,
}

impl<'a> PathRunner<'a> {
    pub fn new(
        model: &'a SimModel,
        config: SimConfig,
        strategy: Strategy<'_>,
        duration: f64,
    ) -> Result<PathRunner<'a>> {
        model.validate()?;
        if config.paths == 0 {
            return Err(Error::InvalidParam { name: "paths", reason: "must be >= 1" });
        }
        if !(config.dt > 0.0) || config.dt > duration / 10.0 + 1e-12 {
            return Err(Error::InvalidParam { name: "dt", reason: "must satisfy 0 < dt <= T/10" });
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidParam { name: "duration", reason: "must be > 0" });
        }
        let sigma = config.sigma_override.unwrap_or_else(|| model.sigma());
        if sigma < 0.0 {
            return Err(Error::InvalidParam { name: "sigma", reason: "must be >= 0" });
        }
        let steps = libm::round(duration / config.dt) as usize;
        if steps < 1 {
            return Err(Error::InvalidParam { name: "dt", reason: "duration shorter than one step" });
        }

        let (tree, players) = match model {
            SimModel::Tree(p) => {
                if config.size < 1 {
                    return Err(Error::InvalidParam { name: "size", reason: "need >= 1 generation" });
                }
                let shape = TreeShape::new(p.branching as usize, config.size)?;
                let total = shape.total;
                (Some(shape), total)
            }
            _ => {
                if config.size < 2 {
                    return Err(Error::InvalidParam { name: "size", reason: "need >= 2 players" });
                }
                (None, config.size)
            }
        };
        if config.track_player >= players {
            return Err(Error::InvalidParam { name: "track_player", reason: "outside population" });
        }

        // sample the strategy on the step grid
        let (rows, min_offset): (Vec<Vec<f64>>, i64) = match strategy {
            Strategy::Stationary(s) => (vec![s.values().to_vec()], 0),
            Strategy::TwoSidedStationary(s) => (vec![s.values().to_vec()], s.min_index()),
            Strategy::Riccati(sol) => {
                let width = sol.row(0).len();
                let mut rows = Vec::with_capacity(steps + 1);
                for s in 0..=steps {
                    let mut row = vec![0.0; width];
                    sol.interp_row(s as f64 * config.dt, &mut row);
                    rows.push(row);
                }
                (rows, sol.min_index())
            }
            Strategy::Tree(sol) => {
                let width = sol.depth() + 1;
                let mut rows = Vec::with_capacity(steps + 1);
                for s in 0..=steps {
                    let mut row = vec![0.0; width];
                    sol.interp_row(s as f64 * config.dt, &mut row);
                    rows.push(row);
                }
                (rows, 0)
            }
        };
        match (&tree, &strategy) {
            (Some(_), Strategy::Tree(_)) => {}
            (Some(_), _) => {
                return Err(Error::InvalidParam {
                    name: "strategy",
                    reason: "tree model needs a tree strategy",
                })
            }
            (None, Strategy::Tree(_)) => {
                return Err(Error::InvalidParam {
                    name: "strategy",
                    reason: "tree strategy needs a tree model",
                })
            }
            (None, _) => {
                let span = rows[0].len() as i64;
                let max_offset = (min_offset + span - 1).max(-min_offset) as usize;
                if matches!(config.boundary, BoundaryPolicy::Periodic) && players < 2 * max_offset {
                    return Err(Error::InvalidParam {
                        name: "size",
                        reason: "periodic wrap needs N >= 2K",
                    });
                }
            }
        }

        Ok(PathRunner {
            model,
            config,
            steps,
            duration,
            sigma,
            noise_scale: sigma * math::sqrt(config.dt),
            rng: CounterRng::new(config.seed),
            rows,
            min_offset,
            players,
            tree,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn rng(&self) -> &CounterRng {
        &self.rng
    }

    fn row(&self, step: usize) -> &[f64] {
        if self.rows.len() == 1 {
            &self.rows[0]
        } else {
            &self.rows[step]
        }
    }

    fn drift_into(&self, row: &[f64], x: &[f64], out: &mut [f64]) {
        if let Some(shape) = &self.tree {
            drift_tree(shape, row, x, out);
        } else {
            drift_linear(
                row,
                self.min_offset,
                matches!(self.config.boundary, BoundaryPolicy::Periodic),
                x,
                out,
            );
        }
    }

    fn player_keys(&self, path: usize) -> Vec<u64> {
        (0..self.players).map(|i| self.rng.player_key(path as u64, i as u64)).collect()
    }

    /// One Euler-Maruyama step; returns false as soon as a state stops
    /// being finite.
    #[inline]
    fn advance(
        &self,
        keys: &[u64],
        step: usize,
        x: &mut [f64],
        drift: &[f64],
        deviation: Option<(usize, f64)>,
    ) -> bool {
        let sd = self.noise_scale;
        let dt = self.config.dt;
        let mut probe = 0.0;
        for ((xi, di), key) in x.iter_mut().zip(drift.iter()).zip(keys.iter()) {
            *xi += di * dt + sd * self.rng.normal_from_key(*key, step as u64);
            probe += *xi;
        }
        if let Some((player, shift)) = deviation {
            x[player] += shift * dt;
            probe += shift * dt;
        }
        math::is_finite(probe)
    }

    fn blow_up(&self, path: usize, step: usize) -> Error {
        Error::SimulationFailure { path, time: step as f64 * self.config.dt }
    }

    /// Terminal state of the tracked player on one path.
    pub fn run_terminal(&self, path: usize) -> Result<f64> {
        let n = self.players;
        let mut x = vec![0.0; n];
        let mut drift = vec![0.0; n];
        let keys = self.player_keys(path);
        for s in 0..self.steps {
            self.drift_into(self.row(s), &x, &mut drift);
            if !self.advance(&keys, s, &mut x, &drift, None) {
                return Err(self.blow_up(path, s));
            }
        }
        Ok(x[self.config.track_player])
    }

    /// Full trajectory of one path into `out[(step, player)]`, row-major,
    /// length (steps+1) × players.
    pub fn run_trajectory(&self, path: usize, out: &mut [f64]) -> Result<()> {
        let n = self.players;
        debug_assert_eq!(out.len(), (self.steps + 1) * n);
        let mut x = vec![0.0; n];
        let mut drift = vec![0.0; n];
        let keys = self.player_keys(path);
        out[..n].copy_from_slice(&x);
        for s in 0..self.steps {
            self.drift_into(self.row(s), &x, &mut drift);
            if !self.advance(&keys, s, &mut x, &drift, None) {
                return Err(self.blow_up(path, s));
            }
            out[(s + 1) * n..(s + 2) * n].copy_from_slice(&x);
        }
        Ok(())
    }

    /// Cost J of `player` on one path under the equilibrium strategy plus a
    /// deterministic control deviation `delta`·`pert`(t) applied to that
    /// player alone. Trapezoidal time quadrature; `delta = 0` is the
    /// equilibrium arm. Noise is shared across arms by construction.
    pub fn run_cost(
        &self,
        path: usize,
        player: usize,
        delta: f64,
        pert: &dyn Fn(f64) -> f64,
    ) -> Result<f64> {
        if player >= self.players {
            return Err(Error::InvalidParam { name: "player", reason: "outside population" });
        }
        let n = self.players;
        let mut x = vec![0.0; n];
        let mut drift = vec![0.0; n];
        let keys = self.player_keys(path);
        let dt = self.config.dt;
        let mut cost = 0.0;
        for s in 0..=self.steps {
            self.drift_into(self.row(s), &x, &mut drift);
            let shift = if delta != 0.0 { delta * pert(s as f64 * dt) } else { 0.0 };
            let alpha = drift[player] + shift;
            let f = 0.5 * alpha * alpha + self.running_distance_cost(&x, player);
            let w = if s == 0 || s == self.steps { 0.5 } else { 1.0 };
            cost += w * f * dt;
            if s < self.steps {
                let dev = (shift != 0.0).then_some((player, shift));
                if !self.advance(&keys, s, &mut x, &drift, dev) {
                    return Err(self.blow_up(path, s));
                }
            }
        }
        cost += self.terminal_distance_cost(&x, player);
        Ok(cost)
    }

    /// (ε/2) × marginalized squared neighbor distance of `player`.
    fn running_distance_cost(&self, x: &[f64], player: usize) -> f64 {
        match self.model {
            SimModel::Chain(p) => {
                0.5 * p.epsilon * p.p * self.right_diff(x, player)
            }
            SimModel::TwoSided(p) => {
                0.5 * p.epsilon
                    * (p.right_weight() * self.right_diff(x, player)
                        + p.left_weight() * self.left_diff(x, player))
            }
            SimModel::Tree(p) => {
                0.5 * p.epsilon * p.effective_weight() * self.child_gap_sq(x, player, p)
            }
        }
    }

    fn terminal_distance_cost(&self, x: &[f64], player: usize) -> f64 {
        match self.model {
            SimModel::Chain(p) => 0.5 * p.c * p.p * self.right_diff(x, player),
            SimModel::TwoSided(p) => {
                0.5 * p.c
                    * (p.right_weight() * self.right_diff(x, player)
                        + p.left_weight() * self.left_diff(x, player))
            }
            SimModel::Tree(p) => {
                0.5 * p.c * p.effective_weight() * self.child_gap_sq(x, player, p)
            }
        }
    }

    fn right_diff(&self, x: &[f64], player: usize) -> f64 {
        let n = x.len();
        let j = match self.config.boundary {
            BoundaryPolicy::Periodic => (player + 1) % n,
            BoundaryPolicy::ZeroTail => {
                if player + 1 >= n {
                    return 0.0; // missing neighbor: no interaction
                }
                player + 1
            }
        };
        let d = x[j] - x[player];
        d * d
    }

    fn left_diff(&self, x: &[f64], player: usize) -> f64 {
        let n = x.len();
        let j = match self.config.boundary {
            BoundaryPolicy::Periodic => (player + n - 1) % n,
            BoundaryPolicy::ZeroTail => {
                if player == 0 {
                    return 0.0;
                }
                player - 1
            }
        };
        let d = x[player] - x[j];
        d * d
    }

    /// ((1/M) Σ_children X − X_player)²; leaves carry no distance term.
    fn child_gap_sq(&self, x: &[f64], player: usize, params: &TreeParams) -> f64 {
        let shape = self.tree.as_ref().expect("tree cost on tree model");
        let (g, idx) = locate(shape, player);
        if g + 1 >= shape.generations {
            return 0.0;
        }
        let m = shape.branching;
        let base = shape.offsets[g + 1] + idx * m;
        let mean = x[base..base + m].iter().sum::<f64>() / f64::from(params.branching);
        let d = mean - x[player];
        d * d
    }
}

fn locate(shape: &TreeShape, node: usize) -> (usize, usize) {
    for g in (0..shape.generations).rev() {
        if node >= shape.offsets[g] {
            return (g, node - shape.offsets[g]);
        }
    }
    (0, 0)
}

/// Dot product over four independent accumulators so the sum runs at FP
/// throughput instead of add latency (this is the innermost drift loop).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let quads = n / 4;
    for c in 0..quads {
        let i = 4 * c;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut s = (s0 + s2) + (s1 + s3);
    for i in 4 * quads..n {
        s += a[i] * b[i];
    }
    s
}

/// drift_i = −Σ_s coeffs[s] · x[i + min_offset + s], wrapped or clipped.
fn drift_linear(coeffs: &[f64], min_offset: i64, periodic: bool, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let len = coeffs.len();
    if periodic {
        for (i, o) in out.iter_mut().enumerate() {
            let start = (i as i64 + min_offset).rem_euclid(n as i64) as usize;
            let first = len.min(n - start);
            let mut acc = dot(&coeffs[..first], &x[start..start + first]);
            if first < len {
                acc += dot(&coeffs[first..], &x[..len - first]);
            }
            *o = -acc;
        }
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            let lo = (-(i as i64) - min_offset).max(0) as usize;
            let hi = ((n as i64 - i as i64 - min_offset).max(0) as usize).min(len);
            if lo >= hi {
                *o = 0.0;
                continue;
            }
            let j0 = (i as i64 + min_offset + lo as i64) as usize;
            *o = -dot(&coeffs[lo..hi], &x[j0..j0 + (hi - lo)]);
        }
    }
}

/// drift of node = −Σ_m Ψ_m × (sum of its depth-m descendants inside the tree).
fn drift_tree(shape: &TreeShape, psi: &[f64], x: &[f64], out: &mut [f64]) {
    for g in 0..shape.generations {
        let avail = shape.generations - 1 - g;
        for idx in 0..shape.widths[g] {
            let node = shape.offsets[g] + idx;
            let mut acc = 0.0;
            let mut width = 1usize;
            for (m, &psi_m) in psi.iter().enumerate().take(avail.min(psi.len() - 1) + 1) {
                let base = shape.offsets[g + m] + idx * width;
                acc += psi_m * x[base..base + width].iter().sum::<f64>();
                width *= shape.branching;
            }
            out[node] = -acc;
        }
    }
}

/// Simulated trajectories with provenance.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    pub kind: ModelKind,
    pub boundary: BoundaryPolicy,
    pub players: usize,
    pub steps: usize,
    pub dt: f64,
    pub sigma: f64,
    pub seed: u64,
    pub rng_id: &'static str,
    pub path_seeds: Vec<u64>,
    data: Vec<f64>,
}

impl PathEnsemble {
    pub fn paths(&self) -> usize {
        self.path_seeds.len()
    }

    pub fn state(&self, path: usize, step: usize, player: usize) -> f64 {
        self.data[(path * (self.steps + 1) + step) * self.players + player]
    }

    /// One path as a (steps+1) × players row-major block.
    pub fn path_block(&self, path: usize) -> &[f64] {
        let stride = (self.steps + 1) * self.players;
        &self.data[path * stride..(path + 1) * stride]
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }
}

/// Memory guard for stored ensembles (~64 MiB of f64).
const ENSEMBLE_BUDGET: usize = 1 << 23;

/// Simulate and store full trajectories. For Monte Carlo sizes beyond the
/// storage budget use [`PathRunner`] streaming (`run_terminal` / `run_cost`)
/// instead.
pub fn simulate(
    model: &SimModel,
    config: SimConfig,
    strategy: Strategy<'_>,
    duration: f64,
) -> Result<PathEnsemble> {
    let runner = PathRunner::new(model, config, strategy, duration)?;
    let stride = (runner.steps() + 1) * runner.players();
    let total = stride.checked_mul(config.paths).ok_or(Error::Resource("ensemble too large"))?;
    if total > ENSEMBLE_BUDGET {
        return Err(Error::Resource("ensemble exceeds storage budget; use streaming runners"));
    }
    let mut data = vec![0.0; total];
    for path in 0..config.paths {
        runner.run_trajectory(path, &mut data[path * stride..(path + 1) * stride])?;
    }
    let path_seeds = (0..config.paths).map(|p| runner.rng.path_seed(p as u64)).collect();
    Ok(PathEnsemble {
        kind: model.kind(),
        boundary: config.boundary,
        players: runner.players(),
        steps: runner.steps(),
        dt: config.dt,
        sigma: runner.sigma,
        seed: config.seed,
        rng_id: RNG_ID,
        path_seeds,
        data,
    })
}

/// Monte Carlo mean/standard-error pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub paths: usize,
}

/// Sample mean and standard error in path order (deterministic reduction).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, math::sqrt(var / n))
}

/// Sample variance with its (Gaussian) standard error.
pub fn variance_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (var, var * math::sqrt(2.0 / (n - 1.0)))
}

/// Monte Carlo estimate of J^player from a stored ensemble, reconstructing
/// controls from the states; `deviation` adds δ·η(t) to that player's
/// control (the ensemble must have been generated with the same deviation
/// for the estimate to be self-consistent — pass `None` for equilibrium
/// ensembles).
pub fn estimate_cost(
    ensemble: &PathEnsemble,
    model: &SimModel,
    config: SimConfig,
    strategy: Strategy<'_>,
    player: usize,
    deviation: Option<(f64, &dyn Fn(f64) -> f64)>,
) -> Result<CostEstimate> {
    let runner = PathRunner::new(model, config, strategy, ensemble.steps as f64 * ensemble.dt)?;
    if runner.players() != ensemble.players || runner.steps() != ensemble.steps {
        return Err(Error::InvalidParam { name: "ensemble", reason: "shape mismatch with config" });
    }
    let n = ensemble.players;
    let mut drift = vec![0.0; n];
    let mut costs = Vec::with_capacity(ensemble.paths());
    for path in 0..ensemble.paths() {
        let block = ensemble.path_block(path);
        let mut cost = 0.0;
        for s in 0..=ensemble.steps {
            let x = &block[s * n..(s + 1) * n];
            runner.drift_into(runner.row(s), x, &mut drift);
            let shift = match deviation {
                Some((delta, pert)) => delta * pert(s as f64 * ensemble.dt),
                None => 0.0,
            };
            let alpha = drift[player] + shift;
            let f = 0.5 * alpha * alpha + runner.running_distance_cost(x, player);
            let w = if s == 0 || s == ensemble.steps { 0.5 } else { 1.0 };
            cost += w * f * ensemble.dt;
        }
        let x_last = &block[ensemble.steps * n..(ensemble.steps + 1) * n];
        cost += runner.terminal_distance_cost(x_last, player);
        costs.push(cost);
    }
    let (mean, std_error) = mean_and_se(&costs);
    Ok(CostEstimate { mean, std_error, paths: costs.len() })
}

/// Verdict for one deviation magnitude under common random numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationVerdict {
    /// Δ > 3σ: deviating is strictly costly.
    Costly,
    /// |Δ| ≤ 3σ: too noisy to sign.
    Inconclusive,
    /// Δ < −3σ: deviation profits — would falsify the equilibrium.
    Improves,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub delta: f64,
    pub mean: f64,
    pub std_error: f64,
    pub verdict: DeviationVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    pub paths: usize,
}

impl DeviationTable {
    /// delta(2δ)/delta(δ)-style ratio between two magnitudes.
    pub fn ratio(&self, numerator: usize, denominator: usize) -> f64 {
        self.rows[numerator].mean / self.rows[denominator].mean
    }
}

/// Per-path workhorse of the deviation test: cost deltas
/// J(equilibrium + δ·pert) − J(equilibrium) for every δ, one path.
pub fn deviation_deltas_for_path(
    runner: &PathRunner<'_>,
    path: usize,
    player: usize,
    pert: &dyn Fn(f64) -> f64,
    deltas: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let base = runner.run_cost(path, player, 0.0, pert)?;
    for (slot, &d) in out.iter_mut().zip(deltas.iter()) {
        *slot = runner.run_cost(path, player, d, pert)? - base;
    }
    Ok(())
}

/// Unilateral-deviation test: perturb one player's control by δ·pert(t),
/// estimate the cost deltas with common random numbers, and report whether
/// each delta is nonnegative at 3σ.
pub fn nash_deviation_test(
    model: &SimModel,
    config: SimConfig,
    strategy: Strategy<'_>,
    player: usize,
    pert: &dyn Fn(f64) -> f64,
    deltas: &[f64],
    duration: f64,
) -> Result<DeviationTable> {
    let runner = PathRunner::new(model, config, strategy, duration)?;
    let mut per_delta: Vec<Vec<f64>> = vec![Vec::with_capacity(config.paths); deltas.len()];
    let mut buf = vec![0.0; deltas.len()];
    for path in 0..config.paths {
        deviation_deltas_for_path(&runner, path, player, pert, deltas, &mut buf)?;
        for (store, &v) in per_delta.iter_mut().zip(buf.iter()) {
            store.push(v);
        }
    }
    Ok(finalize_deviation(deltas, &per_delta, config.paths))
}

/// Deterministic reduction of per-path deltas into the verdict table
/// (shared by the sequential and thread-parallel drivers).
pub fn finalize_deviation(deltas: &[f64], per_delta: &[Vec<f64>], paths: usize) -> DeviationTable {
    let rows = deltas
        .iter()
        .zip(per_delta.iter())
        .map(|(&delta, values)| {
            let (mean, std_error) = mean_and_se(values);
            let verdict = if mean > 3.0 * std_error {
                DeviationVerdict::Costly
            } else if mean < -3.0 * std_error {
                DeviationVerdict::Improves
            } else {
                DeviationVerdict::Inconclusive
            };
            DeviationRow { delta, mean, std_error, verdict }
        })
        .collect();
    DeviationTable { rows, paths }
}

/// Analytic-vs-simulated variance pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCrosscheck {
    /// Quadrature over the full kernel (the infinite system).
    pub analytic: f64,
    /// Quadrature truncated to the simulated window — the exact law of the
    /// tracked player in the zero-tail system.
    pub analytic_windowed: f64,
    pub simulated: f64,
    pub std_error: f64,
    /// z-score of the simulation against the window-matched value.
    pub z_windowed: f64,
    /// z-score against the infinite-window value (carries the truncation
    /// bias of the finite player set on top of Monte Carlo noise).
    pub z_full: f64,
    pub paths: usize,
}

/// Pair the variance quadrature with a fresh stationary-equilibrium
/// simulation of the first player of a zero-tail truncation.
pub fn exact_variance_crosscheck(
    params: &ChainParams,
    t: f64,
    config: SimConfig,
) -> Result<VarianceCrosscheck> {
    params.validate()?;
    if params.p == 0.0 {
        return Err(Error::InvalidParam { name: "p", reason: "crosscheck needs p > 0" });
    }
    if !matches!(config.boundary, BoundaryPolicy::ZeroTail) || config.track_player != 0 {
        return Err(Error::InvalidParam {
            name: "config",
            reason: "crosscheck requires zero-tail boundary tracking player 0",
        });
    }
    let coeffs = catalan::stationary_chain_coeffs(params.p, params.epsilon, config.size - 1)?;
    let model = SimModel::Chain(*params);
    let runner = PathRunner::new(&model, config, Strategy::Stationary(&coeffs), t)?;
    let mut terminals = Vec::with_capacity(config.paths);
    for path in 0..config.paths {
        terminals.push(runner.run_terminal(path)?);
    }
    finalize_variance_crosscheck(params, t, config, &terminals)
}

/// Reduction half of the crosscheck, reusable by parallel drivers.
pub fn finalize_variance_crosscheck(
    params: &ChainParams,
    t: f64,
    config: SimConfig,
    terminals: &[f64],
) -> Result<VarianceCrosscheck> {
    let sigma = config.sigma_override.unwrap_or(params.sigma);
    let s2 = sigma * sigma;
    let analytic = s2 * catalan::variance_chain(t, params.p, 32)?.value;
    let analytic_windowed =
        s2 * catalan::variance_chain_windowed(t, params.p, 32, config.size)?.value;
    let (simulated, std_error) = variance_and_se(terminals);
    let guard = std_error.max(1e-300);
    Ok(VarianceCrosscheck {
        analytic,
        analytic_windowed,
        simulated,
        std_error,
        z_windowed: (simulated - analytic_windowed) / guard,
        z_full: (simulated - analytic) / guard,
        paths: terminals.len(),
    })
}
