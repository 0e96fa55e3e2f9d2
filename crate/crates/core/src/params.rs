//! Validated model parameters for the three game geometries.

use crate::math;
use crate::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

fn require(cond: bool, name: &'static str, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParam { name, reason })
    }
}

/// One-sided random directed chain: each player is linked to its right
/// neighbor independently with probability `p`, which marginalizes into the
/// cost weight.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ChainParams {
    /// Running-cost weight ε > 0.
    pub epsilon: f64,
    /// Terminal-cost weight c ≥ 0.
    pub c: f64,
    /// Link probability p ∈ [0, 1].
    pub p: f64,
    /// Diffusion σ > 0.
    pub sigma: f64,
    /// Horizon T > 0.
    pub horizon: f64,
}

impl ChainParams {
    pub fn new(epsilon: f64, c: f64, p: f64, sigma: f64, horizon: f64) -> Result<Self> {
        let s = Self { epsilon, c, p, sigma, horizon };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.epsilon > 0.0 && math::is_finite(self.epsilon), "epsilon", "must be > 0")?;
        require(self.c >= 0.0 && math::is_finite(self.c), "c", "must be >= 0")?;
        require((0.0..=1.0).contains(&self.p), "p", "must lie in [0, 1]")?;
        require(self.sigma > 0.0 && math::is_finite(self.sigma), "sigma", "must be > 0")?;
        require(self.horizon > 0.0 && math::is_finite(self.horizon), "horizon", "must be > 0")?;
        Ok(())
    }
}

/// Two-sided random chain: right links with probability `p1`, left links
/// with probability `q1`, mixed by the asymmetry weight `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TwoSidedParams {
    pub epsilon: f64,
    pub c: f64,
    /// Asymmetry weight p ∈ (0, 1) between right and left criteria.
    pub p: f64,
    /// Right-link probability p₁ ∈ [0, 1].
    pub p1: f64,
    /// Left-link probability q₁ ∈ [0, 1].
    pub q1: f64,
    pub sigma: f64,
    pub horizon: f64,
}

impl TwoSidedParams {
    pub fn new(
        epsilon: f64,
        c: f64,
        p: f64,
        p1: f64,
        q1: f64,
        sigma: f64,
        horizon: f64,
    ) -> Result<Self> {
        let s = Self { epsilon, c, p, p1, q1, sigma, horizon };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.epsilon > 0.0 && math::is_finite(self.epsilon), "epsilon", "must be > 0")?;
        require(self.c >= 0.0 && math::is_finite(self.c), "c", "must be >= 0")?;
        require(self.p > 0.0 && self.p < 1.0, "p", "must lie in (0, 1)")?;
        require((0.0..=1.0).contains(&self.p1), "p1", "must lie in [0, 1]")?;
        require((0.0..=1.0).contains(&self.q1), "q1", "must lie in [0, 1]")?;
        require(self.b() > 0.0, "p1", "p*p1 + (1-p)*q1 must be > 0")?;
        require(self.sigma > 0.0 && math::is_finite(self.sigma), "sigma", "must be > 0")?;
        require(self.horizon > 0.0 && math::is_finite(self.horizon), "horizon", "must be > 0")?;
        Ok(())
    }

    /// Right cost weight p·p₁.
    pub fn right_weight(&self) -> f64 {
        self.p * self.p1
    }

    /// Left cost weight (1−p)·q₁.
    pub fn left_weight(&self) -> f64 {
        (1.0 - self.p) * self.q1
    }

    /// Total weight B = p·p₁ + (1−p)·q₁.
    pub fn b(&self) -> f64 {
        self.right_weight() + self.left_weight()
    }

    /// Normalized right share w = p·p₁ / B; w + v = 1.
    pub fn w(&self) -> f64 {
        self.right_weight() / self.b()
    }

    /// Normalized left share v = (1−p)·q₁ / B.
    pub fn v(&self) -> f64 {
        self.left_weight() / self.b()
    }
}

/// Random directed M-ary tree: each parent-child link of the next
/// generation is present independently with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TreeParams {
    /// Branching factor M ≥ 1.
    pub branching: u32,
    /// Link probability p ∈ (0, 1].
    pub p: f64,
    pub epsilon: f64,
    pub c: f64,
    pub sigma: f64,
    pub horizon: f64,
}

impl TreeParams {
    pub fn new(
        branching: u32,
        p: f64,
        epsilon: f64,
        c: f64,
        sigma: f64,
        horizon: f64,
    ) -> Result<Self> {
        let s = Self { branching, p, epsilon, c, sigma, horizon };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        require(self.branching >= 1, "branching", "must be >= 1")?;
        require(self.p > 0.0 && self.p <= 1.0, "p", "must lie in (0, 1]")?;
        require(self.epsilon > 0.0 && math::is_finite(self.epsilon), "epsilon", "must be > 0")?;
        require(self.c >= 0.0 && math::is_finite(self.c), "c", "must be >= 0")?;
        require(self.sigma > 0.0 && math::is_finite(self.sigma), "sigma", "must be > 0")?;
        require(self.horizon > 0.0 && math::is_finite(self.horizon), "horizon", "must be > 0")?;
        Ok(())
    }

    /// Probability p₀ = (1−p)^M that a player has no link at all, computed
    /// in log space so large M does not underflow prematurely.
    pub fn p0(&self) -> f64 {
        if self.p == 1.0 {
            0.0
        } else {
            math::exp(f64::from(self.branching) * math::ln1p(-self.p))
        }
    }

    /// Effective cost weight 1 − p₀.
    pub fn effective_weight(&self) -> f64 {
        -libm::expm1(f64::from(self.branching) * math::ln1p(-self.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_validation() {
        assert!(ChainParams::new(1.0, 1.0, 0.5, 1.0, 2.0).is_ok());
        assert!(matches!(
            ChainParams::new(0.0, 1.0, 0.5, 1.0, 2.0),
            Err(Error::InvalidParam { name: "epsilon", .. })
        ));
        assert!(ChainParams::new(1.0, 1.0, 1.2, 1.0, 2.0).is_err());
        assert!(ChainParams::new(1.0, -0.1, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn twosided_weights() {
        let q = TwoSidedParams::new(1.0, 1.0, 0.5, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(q.b(), 1.0);
        assert_eq!(q.w() + q.v(), 1.0);
        // B = 0 rejected
        assert!(TwoSidedParams::new(1.0, 1.0, 0.5, 0.0, 0.0, 1.0, 2.0).is_err());
        assert!(TwoSidedParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn tree_p0() {
        let t = TreeParams::new(2, 0.5, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert!((t.p0() - 0.25).abs() < 1e-15);
        assert!((t.effective_weight() - 0.75).abs() < 1e-15);
        let big = TreeParams::new(500, 0.9, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(big.p0(), 0.0);
        assert_eq!(big.effective_weight(), 1.0);
    }
}
