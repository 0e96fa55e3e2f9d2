//! Brute-force verifiers.
//!
//! Everything here is deliberately plain — dense matrices, contour averages,
//! central differences, an unreduced per-node tree integration — and shares
//! no code with the closed-form paths it checks.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::math;
use crate::params::TreeParams;
use crate::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, a: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.dim + j] = v;
    }

    /// Maximum absolute row sum (operator ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.dim {
            let mut s = 0.0;
            for j in 0..self.dim {
                s += math::abs(self.a[i * self.dim + j]);
            }
            best = best.max(s);
        }
        best
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, a: self.a.iter().map(|v| v * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                let row = &other.a[k * n..(k + 1) * n];
                let dst = &mut out.a[i * n..(i + 1) * n];
                for j in 0..n {
                    dst[j] += aik * row[j];
                }
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &Self, s: f64) {
        for (d, o) in self.a.iter_mut().zip(other.a.iter()) {
            *d += s * o;
        }
    }
}

/// exp(t·A) by scaling and squaring with a truncated Taylor series: scale so
/// ‖tA/2^s‖∞ ≤ 1/2, sum until terms underflow, square back s times.
pub fn dense_expm(matrix: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    let n = matrix.dim();
    if n == 0 || n > 1024 {
        return Err(Error::Resource("dense_expm supports dimensions 1..=1024"));
    }
    let a = matrix.scale(t);
    let norm = a.norm_inf();
    if !math::is_finite(norm) {
        return Err(Error::Domain("dense_expm requires finite entries"));
    }
    let mut squarings = 0u32;
    while norm / math::powi(2.0, squarings as i32) > 0.5 {
        squarings += 1;
        if squarings > 60 {
            return Err(Error::Resource("dense_expm scaling budget exceeded"));
        }
    }
    let b = a.scale(1.0 / math::powi(2.0, squarings as i32));

    // Taylor: I + B + B^2/2! + ... ; with ‖B‖ ≤ 1/2, 24 terms reach ~1e-19
    let mut result = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=24 {
        term = term.matmul(&b);
        let coeff = 1.0 / k as f64;
        term = term.scale(coeff);
        result.add_scaled(&term, 1.0);
        if term.norm_inf() < 1e-19 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

/// Laurent coefficients c_{-trunc}..c_{trunc} of `f` on the circle |z| = r
/// by discrete contour averages, doubling the node count from 8·trunc until
/// consecutive extractions agree to 1e-12 (aliasing control).
///
/// Stabilization is measured on the raw Fourier averages c_j·r^j, which sit
/// at the scale of |f|; the returned c_j then carry the r^{-j} scaling, so a
/// radius far inside the analyticity annulus trades positive-index accuracy
/// for aliasing margin and callers should pick r near the geometric mean of
/// the bounding singularities.
pub fn cauchy_coeffs(
    f: &dyn Fn(Complex64) -> Complex64,
    trunc: usize,
    radius: f64,
) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return Err(Error::Domain("cauchy_coeffs requires radius > 0"));
    }
    let mut n = (8 * trunc.max(1)).next_power_of_two();
    let mut prev = contour_pass(f, trunc, radius, n);
    let mut achieved = f64::INFINITY;
    for _ in 0..14 {
        n *= 2;
        let cur = contour_pass(f, trunc, radius, n);
        achieved = 0.0f64;
        for (a, b) in prev.iter().zip(cur.iter()) {
            achieved = achieved.max(math::abs(a - b));
        }
        if achieved <= 1e-12 {
            return Ok(scale_by_radius(cur, trunc, radius));
        }
        prev = cur;
    }
    Err(Error::Accuracy { wanted: 1e-12, achieved })
}

fn scale_by_radius(raw: Vec<f64>, trunc: usize, radius: f64) -> Vec<f64> {
    raw.into_iter()
        .enumerate()
        .map(|(idx, a)| {
            let j = idx as i64 - trunc as i64;
            a / math::pow(radius, j as f64)
        })
        .collect()
}

fn contour_pass(f: &dyn Fn(Complex64) -> Complex64, trunc: usize, radius: f64, n: usize) -> Vec<f64> {
    let m = 2 * trunc + 1;
    let mut acc = vec![Complex64::new(0.0, 0.0); m];
    let step = 2.0 * core::f64::consts::PI / n as f64;
    for i in 0..n {
        let th = step * i as f64;
        let z = Complex64::new(radius * math::cos(th), radius * math::sin(th));
        let fz = f(z);
        // accumulate f(z) e^{-i j th} for j = -trunc..trunc via rotation
        let w = Complex64::new(math::cos(th), -math::sin(th));
        let mut rot = Complex64::new(math::cos(trunc as f64 * th), math::sin(trunc as f64 * th));
        for slot in acc.iter_mut() {
            *slot += fz * rot;
            rot *= w;
        }
    }
    acc.iter().map(|slot| slot.re / n as f64).collect()
}

/// Per-node coefficient table of the unreduced tree Riccati system on an
/// explicit G-generation tree.
#[derive(Debug, Clone)]
pub struct BruteTree {
    pub generations: usize,
    pub branching: usize,
    /// grid times 0..=steps (uniform on [0, T])
    pub grid: Vec<f64>,
    /// pair index -> trajectory; see [`BruteTree::pair_index`]
    pub values: Vec<Vec<f64>>,
    pairs: Vec<(usize, usize)>,
    node_offsets: Vec<usize>,
}

impl BruteTree {
    /// Nodes are numbered generation-major: node (g, i) with 0 ≤ i < M^g.
    pub fn node_id(&self, generation: usize, index: usize) -> usize {
        self.node_offsets[generation] + index
    }

    /// Index of the pair (ancestor node, descendant node), if stored.
    pub fn pair_index(&self, node: usize, descendant: usize) -> Option<usize> {
        self.pairs.iter().position(|&(a, b)| a == node && b == descendant)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn trajectory(&self, pair: usize) -> &[f64] {
        &self.values[pair]
    }
}

/// Integrate the full per-node system: for the pair (a, b) with b in the
/// subtree of a at depth d, the drift is the sum over intermediate
/// generations of phi(a, anc) * phi(anc, b) where anc is the unique ancestor
/// of b at that generation, with sources at depths 0 and 1.
pub fn brute_force_tree(params: &TreeParams, generations: usize, steps: usize) -> Result<BruteTree> {
    params.validate()?;
    if generations == 0 {
        return Err(Error::InvalidParam { name: "generations", reason: "must be >= 1" });
    }
    let m = params.branching as usize;
    // node counts per generation
    let mut counts = Vec::with_capacity(generations);
    let mut total = 0usize;
    let mut c = 1usize;
    for _ in 0..generations {
        counts.push(c);
        total += c;
        if total > 10_000 {
            return Err(Error::Resource("tree exceeds 10^4 nodes"));
        }
        c = c.saturating_mul(m);
    }
    let mut node_offsets = Vec::with_capacity(generations);
    let mut off = 0;
    for &cnt in &counts {
        node_offsets.push(off);
        off += cnt;
    }

    // enumerate stored pairs: every node with every descendant inside the tree
    let mut pairs = Vec::new();
    for g in 0..generations {
        for i in 0..counts[g] {
            let a = node_offsets[g] + i;
            for h in g..generations {
                let d = h - g;
                let width = m.pow(d as u32);
                for j in 0..width {
                    let b = node_offsets[h] + i * width + j;
                    pairs.push((a, b));
                }
            }
        }
    }
    if pairs.len() > 200_000 {
        return Err(Error::Resource("tree pair table too large"));
    }

    // helper tables: generation of each node, index within generation
    let mut gen_of = vec![0usize; off];
    let mut idx_of = vec![0usize; off];
    for g in 0..generations {
        for i in 0..counts[g] {
            gen_of[node_offsets[g] + i] = g;
            idx_of[node_offsets[g] + i] = i;
        }
    }
    let pair_slot: alloc::collections::BTreeMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(s, &p)| (p, s)).collect();

    let weight = params.effective_weight();
    let eps = params.epsilon;
    let cterm = params.c;
    let mf = m as f64;

    // terminal data
    let mut terminal = vec![0.0; pairs.len()];
    for (s, &(a, b)) in pairs.iter().enumerate() {
        let d = gen_of[b] - gen_of[a];
        terminal[s] = match d {
            0 => cterm * weight,
            1 => -cterm * weight / mf,
            _ => 0.0,
        };
    }

    // ancestor of node b at generation g (g <= gen(b))
    let ancestor = |b: usize, g: usize| -> usize {
        let gb = gen_of[b];
        let idx = idx_of[b] / m.pow((gb - g) as u32);
        node_offsets[g] + idx
    };

    let run = crate::ode::integrate_backward(&terminal, params.horizon, steps, |y, dy| {
        for (s, &(a, b)) in pairs.iter().enumerate() {
            let ga = gen_of[a];
            let gb = gen_of[b];
            let mut acc = 0.0;
            for g in ga..=gb {
                let anc = ancestor(b, g);
                let lo = pair_slot[&(a, anc)];
                let hi = pair_slot[&(anc, b)];
                acc += y[lo] * y[hi];
            }
            let d = gb - ga;
            if d == 0 {
                acc -= eps * weight;
            } else if d == 1 {
                acc += eps * weight / mf;
            }
            dy[s] = acc;
        }
    })?;

    let grid = (0..=steps).map(|i| params.horizon * i as f64 / steps as f64).collect();
    // transpose: per-pair trajectories
    let mut values = vec![vec![0.0; steps + 1]; pairs.len()];
    for (ti, row) in run.rows.iter().enumerate() {
        for (s, v) in row.iter().enumerate() {
            values[s][ti] = *v;
        }
    }
    Ok(BruteTree { generations, branching: m, grid, values, pairs, node_offsets })
}

/// Central-difference derivative with Richardson extrapolation over
/// h ∈ {1e-3, 5e-4, 2.5e-4}; returns (estimate, error estimate).
pub fn finite_difference(f: &dyn Fn(f64) -> Result<f64>, x: f64) -> Result<(f64, f64)> {
    let mut d = [0.0f64; 3];
    let mut h = 1e-3;
    for slot in d.iter_mut() {
        let up = f(x + h)?;
        let dn = f(x - h)?;
        if !math::is_finite(up) || !math::is_finite(dn) {
            return Err(Error::Domain("finite_difference: non-finite evaluation"));
        }
        *slot = (up - dn) / (2.0 * h);
        h /= 2.0;
    }
    // two Richardson levels of the O(h^2) central difference
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r2 = (4.0 * d[2] - d[1]) / 3.0;
    let best = (16.0 * r2 - r1) / 15.0;
    Ok((best, math::abs(r2 - r1)))
}
