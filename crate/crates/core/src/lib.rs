//! Numerics for linear-quadratic stochastic games on random directed networks.
//!
//! Players sit on a random one-sided chain, a random two-sided chain, or a
//! random M-ary tree, and each pays a quadratic cost for distance to the
//! neighbors it is linked to. The open-loop Nash equilibrium collapses into a
//! terminal-valued system of Riccati ODEs for distance-indexed coefficients
//! `phi_t^k`; its T → ∞ limit is a constant sequence tied to the Catalan
//! numbers, and the equilibrium state process is a Gaussian process driven by
//! a continuous-time Markov chain with an upper-triangular Toeplitz generator.
//!
//! The crate provides:
//!
//! - [`riccati`]: backward solvers for the finite-horizon systems and the
//!   closed-form generating functions that certify them,
//! - [`catalan`]: the stationary one-sided solution, the Catalan generator,
//!   transition-kernel entries, and variance quadrature,
//! - [`twosided`]: stationary two-sided coefficients through hypergeometric
//!   series and the two-sided kernel weights,
//! - [`tree`]: the depth-reduced tree system and its brute-force checks,
//! - [`sim`]: Euler–Maruyama simulation with a counter-based RNG, cost
//!   estimation, and a Nash unilateral-deviation tester,
//! - [`oracle`]: independent verifiers (dense matrix exponential, contour
//!   coefficient extraction, unreduced tree integration, finite differences).
//!
//! Everything is `f64`, deterministic, and usable from `no_std` + `alloc`
//! builds; transcendentals go through `libm` so results do not depend on the
//! host math library.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalan;
mod error;
pub mod oracle;
pub mod params;
pub mod riccati;
pub mod sim;
pub mod tree;
pub mod twosided;

mod math;
mod ode;
pub mod rng;

pub use error::Error;
pub use params::{ChainParams, TreeParams, TwoSidedParams};

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
