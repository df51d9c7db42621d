//! Fractional-order constants, the diffusive kernel and its ξ-axis quadrature.
//!
//! The Caputo derivative with exponential shift
//!
//! ```text
//! ∂^{α,η} w(t) = 1/Γ(1-α) ∫_0^t (t-s)^{-α} e^{-η(t-s)} w'(s) ds
//! ```
//!
//! is realized as the output `κ(α) ∫ μ(ξ) ω(ξ) dξ` of the family of scalar
//! relaxations `ω' = -(ξ²+η) ω + μ(ξ) w'`, with `μ(ξ) = |ξ|^{(2α-1)/2}` and
//! `κ(α) = sin(απ)/π`.

mod grid;
mod integrals;
pub mod quadrature;
mod realization;

pub use grid::{build_xi_grid, default_xi_max, default_xi_min, XiGrid, DEFAULT_QUAD_TOL};
pub use integrals::{
    c1_constant, closed_i1, closed_i12, closed_i13, closed_i14, quad_integral, IntegralId, IntegralTag,
};
pub use realization::DiffusiveRealization;

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Order and shift of the fractional damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalParams {
    alpha: f64,
    eta: f64,
}

impl FractionalParams {
    pub fn new(alpha: f64, eta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::domain(format!("eta must satisfy eta >= 0, got {eta}")));
        }
        Ok(Self { alpha, eta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Always recomputed from `alpha`.
    pub fn kappa(&self) -> f64 {
        kappa_unchecked(self.alpha)
    }

    /// Rejects `eta == 0`, which the decay results exclude.
    pub fn require_positive_eta(&self) -> Result<()> {
        if self.eta > 0.0 {
            Ok(())
        } else {
            Err(Error::Hypothesis(
                "evolution and resolvent experiments require eta > 0".into(),
            ))
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must satisfy 0 < alpha < 1, got {alpha}")))
    }
}

fn kappa_unchecked(alpha: f64) -> f64 {
    (alpha * PI).sin() / PI
}

/// `κ(α) = sin(απ)/π`.
pub fn kappa(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(kappa_unchecked(alpha))
}

/// `μ(ξ) = |ξ|^{(2α-1)/2}`. Quadrature nodes never sit at ξ = 0.
pub fn mu(xi: f64, alpha: f64) -> f64 {
    xi.abs().powf(alpha - 0.5)
}
